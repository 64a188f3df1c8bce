#include "hyperforge/lattice.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <string>
#include <thread>
#include <utility>

#include "hyperforge/errors.hpp"
#include "hyperforge/kernels.hpp"
#include "hyperforge/random.hpp"

namespace hf {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double factorial(int m) {
    double f = 1.0;
    for (int i = 2; i <= m; ++i) f *= i;
    return f;
}

double sq(double x) { return x * x; }
double norm2(cplx z) { return std::norm(z); }

// ---------------------------------------------------------------------------
// Dense per-axis DFT.  Forward uses the mean-weighted convention
//   fhat(k) = (1/P^N) sum_x f(x) exp(-i k.x),
// so coefficients are Fourier amplitudes (f(x) = sum_k fhat(k) exp(i k.x))
// and Parseval reads  int |f|^2 = volume * sum_k |fhat(k)|^2.

struct DftPlan {
    int P = 0;
    std::vector<cplx> fwd;  // fwd[o*P + t] = exp(-2 pi i o t / P) / P
    std::vector<cplx> inv;  // inv[o*P + t] = exp(+2 pi i o t / P)
};

DftPlan make_plan(int P) {
    DftPlan plan;
    plan.P = P;
    plan.fwd.resize(static_cast<std::size_t>(P) * P);
    plan.inv.resize(static_cast<std::size_t>(P) * P);
    for (int o = 0; o < P; ++o) {
        for (int t = 0; t < P; ++t) {
            const double ang = kTwoPi * static_cast<double>(o) * t / P;
            plan.fwd[static_cast<std::size_t>(o) * P + t] =
                cplx(std::cos(ang), -std::sin(ang)) / static_cast<double>(P);
            plan.inv[static_cast<std::size_t>(o) * P + t] = cplx(std::cos(ang), std::sin(ang));
        }
    }
    return plan;
}

void transform_axes(const PeriodicGrid& g, std::vector<cplx>& plane, bool forward) {
    const int P = g.points;
    const DftPlan plan = make_plan(P);
    const std::vector<cplx>& M = forward ? plan.fwd : plan.inv;
    std::vector<cplx> line(static_cast<std::size_t>(P));
    std::vector<cplx> out(static_cast<std::size_t>(P));
    for (int axis = 0; axis < g.dimension; ++axis) {
        const std::size_t s = g.stride(axis);
        const std::size_t block = s * static_cast<std::size_t>(P);
        for (std::size_t base = 0; base < plane.size(); base += block) {
            for (std::size_t off = 0; off < s; ++off) {
                const std::size_t start = base + off;
                for (int t = 0; t < P; ++t) line[static_cast<std::size_t>(t)] = plane[start + static_cast<std::size_t>(t) * s];
                for (int o = 0; o < P; ++o) {
                    const cplx* row = &M[static_cast<std::size_t>(o) * P];
                    cplx acc(0.0, 0.0);
                    for (int t = 0; t < P; ++t) acc += row[t] * line[static_cast<std::size_t>(t)];
                    out[static_cast<std::size_t>(o)] = acc;
                }
                for (int o = 0; o < P; ++o) plane[start + static_cast<std::size_t>(o) * s] = out[static_cast<std::size_t>(o)];
            }
        }
    }
}

// Derivative frequency of mode index t on P points; the Nyquist mode P/2 has
// no unambiguous sign and differentiates to zero.
double freq_of(int t, int P) {
    if (t == P / 2) return 0.0;
    return t < P / 2 ? static_cast<double>(t) : static_cast<double>(t - P);
}

// kf[axis][site] = derivative frequency of the site's mode on that axis.
std::vector<std::vector<double>> frequency_planes(const PeriodicGrid& g) {
    std::vector<std::vector<double>> kf(static_cast<std::size_t>(g.dimension),
                                        std::vector<double>(g.size()));
    for (int axis = 0; axis < g.dimension; ++axis) {
        for (std::size_t site = 0; site < g.size(); ++site) {
            kf[static_cast<std::size_t>(axis)][site] = freq_of(g.coord(site, axis), g.points);
        }
    }
    return kf;
}

// ---------------------------------------------------------------------------
// Validation

void validate_grid(const PeriodicGrid& g) {
    if (g.dimension == 0) throw structural_error("lattice: grid is default-constructed (empty)");
}

double plane_max_abs(const std::vector<cplx>& p) {
    double m = 0.0;
    for (const cplx& z : p) m = std::max(m, std::abs(z));
    return m;
}

void validate_skew_planes(const std::vector<std::vector<cplx>>& planes, int rank,
                          std::size_t nsites, int groups, const char* what) {
    if (planes.size() != static_cast<std::size_t>(groups) * rank * rank)
        throw structural_error(std::string(what) + ": wrong number of coefficient planes");
    for (const auto& p : planes)
        if (p.size() != nsites) throw structural_error(std::string(what) + ": plane size does not match the grid");
    for (int gidx = 0; gidx < groups; ++gidx) {
        for (int p = 0; p < rank; ++p) {
            for (int q = p; q < rank; ++q) {
                const auto& xpq = planes[static_cast<std::size_t>((gidx * rank + p) * rank + q)];
                const auto& xqp = planes[static_cast<std::size_t>((gidx * rank + q) * rank + p)];
                double worst = 0.0;
                for (std::size_t s = 0; s < nsites; ++s)
                    worst = std::max(worst, std::abs(xpq[s] + std::conj(xqp[s])));
                const double scale = std::max(1.0, std::max(plane_max_abs(xpq), plane_max_abs(xqp)));
                if (worst > 1e-12 * scale)
                    throw domain_error(std::string(what) + ": coefficients are not skew-Hermitian");
            }
        }
    }
}

void validate_connection(const LatticeConnection& conn) {
    validate_grid(conn.grid);
    if (conn.rank != 1 && conn.rank != 2)
        throw structural_error("lattice connection: rank must be 1 or 2");
    validate_skew_planes(conn.a, conn.rank, conn.grid.size(), conn.grid.dimension,
                         "lattice connection potential");
    if (conn.harmonic.empty()) return;
    if (conn.harmonic.size() != static_cast<std::size_t>(conn.rank) * conn.rank)
        throw structural_error("lattice connection: harmonic part needs rank*rank forms (or none)");
    for (const Form& h : conn.harmonic) {
        if (h.dim() != conn.grid.dimension || h.degree() != 2)
            throw structural_error("lattice connection: harmonic part must be degree-2 forms on the grid dimension");
    }
    for (int p = 0; p < conn.rank; ++p) {
        for (int q = p; q < conn.rank; ++q) {
            const Form& hpq = conn.harmonic[static_cast<std::size_t>(p * conn.rank + q)];
            const Form& hqp = conn.harmonic[static_cast<std::size_t>(q * conn.rank + p)];
            const double scale = std::max(1.0, std::max(hpq.norm(), hqp.norm()));
            if ((hpq + hqp.conjugate()).norm() > 1e-12 * scale)
                throw domain_error("lattice connection: harmonic part is not skew-Hermitian");
        }
    }
}

void validate_field(const LatticeField& f) {
    validate_grid(f.grid);
    if (f.rank != 1 && f.rank != 2) throw structural_error("lattice field: rank must be 1 or 2");
    if (f.degree < 0 || f.degree > f.grid.dimension)
        throw structural_error("lattice field: degree out of range");
    const std::size_t want = static_cast<std::size_t>(f.rank) * f.rank * choose(f.grid.dimension, f.degree);
    if (f.planes.size() != want) throw structural_error("lattice field: wrong number of planes");
    for (const auto& p : f.planes)
        if (p.size() != f.grid.size()) throw structural_error("lattice field: plane size does not match the grid");
}

// ---------------------------------------------------------------------------
// Site-parallel accumulation: fixed chunk boundaries, combined in chunk
// order, so results are bit-stable for a given thread count.

template <class Acc, class SiteFn>
std::vector<Acc> site_parallel(std::size_t n, const SiteFn& fn) {
    const int T = lattice_threads();
    std::vector<Acc> acc(static_cast<std::size_t>(T));
    auto run = [&](int c) {
        const std::size_t lo = n * static_cast<std::size_t>(c) / static_cast<std::size_t>(T);
        const std::size_t hi = n * static_cast<std::size_t>(c + 1) / static_cast<std::size_t>(T);
        for (std::size_t s = lo; s < hi; ++s) fn(s, acc[static_cast<std::size_t>(c)]);
    };
    if (T == 1) {
        run(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(T - 1));
        for (int c = 1; c < T; ++c) pool.emplace_back(run, c);
        run(0);
        for (std::thread& t : pool) t.join();
    }
    return acc;
}

// ---------------------------------------------------------------------------
// tr(F ^ F) pointwise and its pairing against a constant form.

Form site_trff(const LatticeField& F, std::size_t site) {
    if (F.rank == 1) {
        const Form f = F.site_form(site);
        return wedge(f, f);
    }
    Form acc(F.grid.dimension, 4);
    for (int p = 0; p < F.rank; ++p)
        for (int q = 0; q < F.rank; ++q) acc += wedge(F.site_form(site, p, q), F.site_form(site, q, p));
    return acc;
}

// sum over sites of weight * Re< tr(F ^ F), star_theta >, i.e. the integral
// of tr(F ^ F) ^ theta for theta = hodge_star^{-1}(star_theta).
double trff_pairing(const LatticeField& F, const Form& star_theta) {
    struct Acc {
        double v = 0.0;
    };
    auto accs = site_parallel<Acc>(F.grid.size(), [&](std::size_t site, Acc& a) {
        a.v += inner_product(site_trff(F, site), star_theta).real();
    });
    double total = 0.0;
    for (const Acc& a : accs) total += a.v;
    return total * F.grid.site_weight();
}

LatticeConnection random_connection_impl(const PeriodicGrid& grid, int rank, int band, Rng& rng);
std::vector<cplx> random_plane_impl(const PeriodicGrid& grid, int band, Rng& rng);

void check_params(const PhiLambdaParams& params) {
    const PhiLambdaParams ref = ab_constants(params.lambda, params.n);
    double gap = 0.0;
    double scale = 1.0;
    for (int i = 0; i < 3; ++i) {
        gap = std::max(gap, std::abs(ref.a[static_cast<std::size_t>(i)] - params.a[static_cast<std::size_t>(i)]));
        gap = std::max(gap, std::abs(ref.b[static_cast<std::size_t>(i)] - params.b[static_cast<std::size_t>(i)]));
        scale = std::max(scale, std::abs(params.lambda[static_cast<std::size_t>(i)]));
    }
    if (gap > 1e-12 * scale)
        throw domain_error("lattice: params do not match ab_constants(lambda, n)");
}

void check_omega_argument(const PeriodicGrid& g, const Form& Omega, const char* what) {
    if (Omega.dim() != g.dimension)
        throw structural_error(std::string(what) + ": Omega lives on the wrong dimension");
    if (Omega.degree() != g.dimension - 4)
        throw structural_error(std::string(what) + ": Omega must have degree N-4");
    if (Omega.imag_part().norm() > 1e-12 * std::max(1.0, Omega.norm()))
        throw domain_error(std::string(what) + ": Omega must be real");
}

}  // namespace

// ---------------------------------------------------------------------------
// Threads

int lattice_threads() {
    const char* env = std::getenv("HYPERFORGE_THREADS");
    if (env == nullptr) return 1;
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || v < 1) return 1;
    return static_cast<int>(std::min<long>(v, 16));
}

// ---------------------------------------------------------------------------
// PeriodicGrid

PeriodicGrid::PeriodicGrid(int dimension_, int points_) : dimension(dimension_), points(points_) {
    if (dimension <= 0 || dimension > 8 || dimension % 4 != 0)
        throw structural_error("periodic grid: dimension must be 4 or 8");
    if (points < 4 || (points & (points - 1)) != 0)
        throw structural_error("periodic grid: points per axis must be a power of two >= 4");
    std::size_t n = 1;
    for (int i = 0; i < dimension; ++i) {
        n *= static_cast<std::size_t>(points);
        if (n > (static_cast<std::size_t>(1) << 22))
            throw structural_error("periodic grid: more than 2^22 sites (memory guard)");
    }
}

std::size_t PeriodicGrid::size() const {
    std::size_t n = 1;
    for (int i = 0; i < dimension; ++i) n *= static_cast<std::size_t>(points);
    return n;
}

double PeriodicGrid::spacing() const { return kTwoPi / points; }

double PeriodicGrid::volume() const { return std::pow(kTwoPi, dimension); }

double PeriodicGrid::site_weight() const { return std::pow(spacing(), dimension); }

std::size_t PeriodicGrid::stride(int axis) const {
    if (axis < 0 || axis >= dimension) throw structural_error("periodic grid: axis out of range");
    std::size_t s = 1;
    for (int i = 0; i < axis; ++i) s *= static_cast<std::size_t>(points);
    return s;
}

int PeriodicGrid::coord(std::size_t site, int axis) const {
    return static_cast<int>((site / stride(axis)) % static_cast<std::size_t>(points));
}

double PeriodicGrid::point(std::size_t site, int axis) const { return coord(site, axis) * spacing(); }

std::size_t PeriodicGrid::shift(std::size_t site, int axis, int delta) const {
    const int t = coord(site, axis);
    int t2 = (t + delta) % points;
    if (t2 < 0) t2 += points;
    return site + (static_cast<std::size_t>(t2) - static_cast<std::size_t>(t)) * stride(axis);
}

bool same_grid(const PeriodicGrid& a, const PeriodicGrid& b) {
    return a.dimension == b.dimension && a.points == b.points;
}

// ---------------------------------------------------------------------------
// LatticeField

int LatticeField::components() const { return choose(grid.dimension, degree); }

std::vector<cplx>& LatticeField::plane(int comp, int p, int q) {
    return planes.at(static_cast<std::size_t>((p * rank + q) * components() + comp));
}

const std::vector<cplx>& LatticeField::plane(int comp, int p, int q) const {
    return planes.at(static_cast<std::size_t>((p * rank + q) * components() + comp));
}

Form LatticeField::site_form(std::size_t site, int p, int q) const {
    Form f(grid.dimension, degree);
    const int C = components();
    const std::size_t base = static_cast<std::size_t>((p * rank + q) * C);
    for (int c = 0; c < C; ++c) f[c] = planes[base + static_cast<std::size_t>(c)][site];
    return f;
}

void LatticeField::set_site_form(std::size_t site, const Form& f, int p, int q) {
    if (f.dim() != grid.dimension || f.degree() != degree)
        throw structural_error("lattice field: site form has the wrong shape");
    const int C = components();
    const std::size_t base = static_cast<std::size_t>((p * rank + q) * C);
    for (int c = 0; c < C; ++c) planes[base + static_cast<std::size_t>(c)][site] = f[c];
}

LatticeField zero_field(const PeriodicGrid& grid, int degree, int rank) {
    validate_grid(grid);
    if (rank != 1 && rank != 2) throw structural_error("lattice field: rank must be 1 or 2");
    if (degree < 0 || degree > grid.dimension)
        throw structural_error("lattice field: degree out of range");
    LatticeField f;
    f.grid = grid;
    f.degree = degree;
    f.rank = rank;
    f.planes.assign(static_cast<std::size_t>(rank) * rank * choose(grid.dimension, degree),
                    std::vector<cplx>(grid.size(), cplx(0.0, 0.0)));
    return f;
}

LatticeField lattice_d(const LatticeField& f) {
    validate_field(f);
    const PeriodicGrid& g = f.grid;
    const int N = g.dimension;
    if (f.degree >= N) throw structural_error("lattice_d: field already has top degree");
    const auto kf = frequency_planes(g);
    const auto& out_masks = degree_masks(N, f.degree + 1);
    LatticeField out = zero_field(g, f.degree + 1, f.rank);
    const int Cin = f.components();
    for (int p = 0; p < f.rank; ++p) {
        for (int q = 0; q < f.rank; ++q) {
            std::vector<std::vector<cplx>> fin(static_cast<std::size_t>(Cin));
            for (int c = 0; c < Cin; ++c) {
                fin[static_cast<std::size_t>(c)] = f.plane(c, p, q);
                transform_axes(g, fin[static_cast<std::size_t>(c)], true);
            }
            for (std::size_t oc = 0; oc < out_masks.size(); ++oc) {
                const std::uint32_t omask = out_masks[oc];
                auto& plane = out.plane(static_cast<int>(oc), p, q);
                std::uint32_t bits = omask;
                while (bits != 0) {
                    const int mu = std::countr_zero(bits);
                    bits &= bits - 1;
                    const std::uint32_t rest = omask ^ (1u << mu);
                    const double sgn = merge_sign(1u << mu, rest);
                    const auto& src = fin[static_cast<std::size_t>(mask_rank(N, rest))];
                    const auto& k = kf[static_cast<std::size_t>(mu)];
                    for (std::size_t s = 0; s < plane.size(); ++s)
                        plane[s] += cplx(0.0, sgn * k[s]) * src[s];
                }
                transform_axes(g, plane, false);
            }
        }
    }
    return out;
}

LatticeField lattice_codifferential(const LatticeField& f) {
    validate_field(f);
    const PeriodicGrid& g = f.grid;
    const int N = g.dimension;
    if (f.degree <= 0) throw structural_error("lattice_codifferential: degree must be positive");
    const auto kf = frequency_planes(g);
    const auto& out_masks = degree_masks(N, f.degree - 1);
    LatticeField out = zero_field(g, f.degree - 1, f.rank);
    const int Cin = f.components();
    for (int p = 0; p < f.rank; ++p) {
        for (int q = 0; q < f.rank; ++q) {
            std::vector<std::vector<cplx>> fin(static_cast<std::size_t>(Cin));
            for (int c = 0; c < Cin; ++c) {
                fin[static_cast<std::size_t>(c)] = f.plane(c, p, q);
                transform_axes(g, fin[static_cast<std::size_t>(c)], true);
            }
            for (std::size_t oc = 0; oc < out_masks.size(); ++oc) {
                const std::uint32_t omask = out_masks[oc];
                auto& plane = out.plane(static_cast<int>(oc), p, q);
                for (int mu = 0; mu < N; ++mu) {
                    if ((omask >> mu) & 1u) continue;
                    const double sgn = merge_sign(1u << mu, omask);
                    const auto& src = fin[static_cast<std::size_t>(mask_rank(N, omask | (1u << mu)))];
                    const auto& k = kf[static_cast<std::size_t>(mu)];
                    for (std::size_t s = 0; s < plane.size(); ++s)
                        plane[s] += cplx(0.0, -sgn * k[s]) * src[s];
                }
                transform_axes(g, plane, false);
            }
        }
    }
    return out;
}

double field_l2_norm(const LatticeField& f) {
    validate_field(f);
    double total = 0.0;
    for (const auto& p : f.planes)
        total += kernels::sumsq(reinterpret_cast<const double*>(p.data()), 2 * p.size());
    return std::sqrt(total * f.grid.site_weight());
}

Form field_mean(const LatticeField& f, int p, int q) {
    validate_field(f);
    Form mean(f.grid.dimension, f.degree);
    const int C = f.components();
    for (int c = 0; c < C; ++c) {
        const auto& plane = f.plane(c, p, q);
        cplx acc(0.0, 0.0);
        for (const cplx& z : plane) acc += z;
        mean[c] = acc / static_cast<double>(plane.size());
    }
    return mean;
}

// ---------------------------------------------------------------------------
// Connections

std::vector<cplx>& LatticeConnection::potential(int axis, int p, int q) {
    return a.at(static_cast<std::size_t>((axis * rank + p) * rank + q));
}

const std::vector<cplx>& LatticeConnection::potential(int axis, int p, int q) const {
    return a.at(static_cast<std::size_t>((axis * rank + p) * rank + q));
}

LatticeConnection zero_connection(const PeriodicGrid& grid, int rank) {
    validate_grid(grid);
    if (rank != 1 && rank != 2) throw structural_error("lattice connection: rank must be 1 or 2");
    LatticeConnection conn;
    conn.grid = grid;
    conn.rank = rank;
    conn.a.assign(static_cast<std::size_t>(grid.dimension) * rank * rank,
                  std::vector<cplx>(grid.size(), cplx(0.0, 0.0)));
    return conn;
}

namespace {

std::vector<cplx> random_plane_impl(const PeriodicGrid& grid, int band, Rng& rng) {
    const int P = grid.points;
    if (band < 1 || band > P / 2 - 1)
        throw domain_error("lattice: band must satisfy 1 <= band <= P/2 - 1");
    const std::size_t n = grid.size();
    std::vector<cplx> ghat(n, cplx(0.0, 0.0));
    const double sigma = 1.0 / std::sqrt(std::pow(2.0 * band + 1.0, grid.dimension));
    for (std::size_t m = 0; m < n; ++m) {
        bool in_band = true;
        for (int axis = 0; axis < grid.dimension && in_band; ++axis) {
            const int t = grid.coord(m, axis);
            if (t == P / 2) in_band = false;
            const int k = t < P / 2 ? t : t - P;
            if (std::abs(k) > band) in_band = false;
        }
        if (!in_band) continue;
        ghat[m] = sigma * cplx(rng.normal(), rng.normal());
    }
    // Hermitian symmetrization so the field is real.
    std::vector<cplx> sym(n);
    for (std::size_t m = 0; m < n; ++m) {
        std::size_t neg = 0;
        for (int axis = 0; axis < grid.dimension; ++axis) {
            const int t = grid.coord(m, axis);
            const int t2 = (P - t) % P;
            neg += static_cast<std::size_t>(t2) * grid.stride(axis);
        }
        sym[m] = 0.5 * (ghat[m] + std::conj(ghat[neg]));
    }
    transform_axes(grid, sym, false);
    for (cplx& z : sym) z = cplx(z.real(), 0.0);
    return sym;
}

LatticeConnection random_connection_impl(const PeriodicGrid& grid, int rank, int band, Rng& rng) {
    LatticeConnection conn = zero_connection(grid, rank);
    for (int nu = 0; nu < grid.dimension; ++nu) {
        for (int p = 0; p < rank; ++p) {
            {
                const std::vector<cplx> gre = random_plane_impl(grid, band, rng);
                auto& diag = conn.potential(nu, p, p);
                for (std::size_t s = 0; s < diag.size(); ++s) diag[s] = cplx(0.0, gre[s].real());
            }
            for (int q = p + 1; q < rank; ++q) {
                const std::vector<cplx> g1 = random_plane_impl(grid, band, rng);
                const std::vector<cplx> g2 = random_plane_impl(grid, band, rng);
                auto& upper = conn.potential(nu, p, q);
                auto& lower = conn.potential(nu, q, p);
                for (std::size_t s = 0; s < upper.size(); ++s) {
                    upper[s] = cplx(g1[s].real(), g2[s].real());
                    lower[s] = -std::conj(upper[s]);
                }
            }
        }
    }
    return conn;
}

}  // namespace

std::vector<cplx> random_band_limited_field(const PeriodicGrid& grid, int band, std::uint64_t seed) {
    validate_grid(grid);
    Rng rng(seed);
    return random_plane_impl(grid, band, rng);
}

LatticeConnection random_band_limited_connection(const PeriodicGrid& grid, int rank, int band,
                                                 std::uint64_t seed) {
    validate_grid(grid);
    if (rank != 1 && rank != 2) throw structural_error("lattice connection: rank must be 1 or 2");
    Rng rng(seed);
    return random_connection_impl(grid, rank, band, rng);
}

LatticeConnection gauge_transform(const LatticeConnection& conn,
                                  const std::vector<std::vector<cplx>>& phi) {
    validate_connection(conn);
    validate_skew_planes(phi, conn.rank, conn.grid.size(), 1, "gauge function");
    const PeriodicGrid& g = conn.grid;
    const auto kf = frequency_planes(g);
    LatticeConnection out = conn;
    for (int p = 0; p < conn.rank; ++p) {
        for (int q = 0; q < conn.rank; ++q) {
            std::vector<cplx> phat = phi[static_cast<std::size_t>(p * conn.rank + q)];
            transform_axes(g, phat, true);
            for (int nu = 0; nu < g.dimension; ++nu) {
                std::vector<cplx> dplane(g.size());
                const auto& k = kf[static_cast<std::size_t>(nu)];
                for (std::size_t s = 0; s < dplane.size(); ++s)
                    dplane[s] = cplx(0.0, k[s]) * phat[s];
                transform_axes(g, dplane, false);
                kernels::cmuladd(cplx(1.0, 0.0), dplane.data(), out.potential(nu, p, q).data(),
                                 dplane.size());
            }
        }
    }
    return out;
}

LatticeField curvature(const LatticeConnection& conn) {
    validate_connection(conn);
    const PeriodicGrid& g = conn.grid;
    const int N = g.dimension;
    const int r = conn.rank;
    const auto& masks = degree_masks(N, 2);
    const auto kf = frequency_planes(g);
    LatticeField F = zero_field(g, 2, r);
    for (int p = 0; p < r; ++p) {
        for (int q = 0; q < r; ++q) {
            std::vector<std::vector<cplx>> ahat(static_cast<std::size_t>(N));
            for (int nu = 0; nu < N; ++nu) {
                ahat[static_cast<std::size_t>(nu)] = conn.potential(nu, p, q);
                transform_axes(g, ahat[static_cast<std::size_t>(nu)], true);
            }
            for (std::size_t c = 0; c < masks.size(); ++c) {
                const std::uint32_t mask = masks[c];
                const int mu = std::countr_zero(mask);
                const int nu = std::bit_width(mask) - 1;
                auto& plane = F.plane(static_cast<int>(c), p, q);
                const auto& kmu = kf[static_cast<std::size_t>(mu)];
                const auto& knu = kf[static_cast<std::size_t>(nu)];
                const auto& amu = ahat[static_cast<std::size_t>(mu)];
                const auto& anu = ahat[static_cast<std::size_t>(nu)];
                for (std::size_t s = 0; s < plane.size(); ++s)
                    plane[s] = cplx(0.0, 1.0) * (kmu[s] * anu[s] - knu[s] * amu[s]);
                transform_axes(g, plane, false);
            }
        }
    }
    if (!conn.harmonic.empty()) {
        for (int p = 0; p < r; ++p) {
            for (int q = 0; q < r; ++q) {
                const Form& h = conn.harmonic[static_cast<std::size_t>(p * r + q)];
                for (std::size_t c = 0; c < masks.size(); ++c) {
                    const cplx hv = h[static_cast<int>(c)];
                    if (hv == cplx(0.0, 0.0)) continue;
                    for (cplx& z : F.plane(static_cast<int>(c), p, q)) z += hv;
                }
            }
        }
    }
    return F;
}

// ---------------------------------------------------------------------------
// Energy-weight constants

PhiLambdaParams ab_constants(const std::array<double, 3>& lambda, int n) {
    if (n < 1) throw domain_error("ab_constants: n must be >= 1");
    const double scale = std::max({1.0, std::abs(lambda[0]), std::abs(lambda[1]), std::abs(lambda[2])});
    if (std::abs(lambda[0] + lambda[1] + lambda[2]) > 1e-12 * scale)
        throw domain_error("ab_constants: lambda must sum to zero");
    if (lambda[0] - 2.0 * lambda[1] - 2.0 * lambda[2] <= 1e-12 * scale)
        throw domain_error("ab_constants: lambda_1 - 2 lambda_2 - 2 lambda_3 must be positive");
    PhiLambdaParams p;
    p.n = n;
    p.lambda = lambda;
    p.a = a_constants(lambda);
    p.b = b_constants(lambda, n);
    return p;
}

// ---------------------------------------------------------------------------
// Energy identities

ConditionReport energy_identities(const LatticeConnection& conn,
                                  const HyperHermitianStructure& structure,
                                  const PhiLambdaParams& params, double tol) {
    validate_connection(conn);
    if (structure.dim() != conn.grid.dimension)
        throw structural_error("energy_identities: structure dimension does not match the grid");
    if (params.n != structure.n)
        throw structural_error("energy_identities: params.n does not match the structure");
    check_params(params);

    const int n = structure.n;
    const int k = 2 * n;  // complex dimension of the torus
    const LatticeField F = curvature(conn);
    const Form theta = wedge_power(structure.omega_I, k - 2) * (1.0 / factorial(k - 2));
    const Form star_h = hodge_star(theta);
    const Form star_phi = hodge_star(phi_lambda(structure, params.lambda));
    const Form& omega_I = structure.omega_I;

    struct Acc {
        double lhs_h = 0.0, rhs_h = 0.0, lhs_p = 0.0, rhs_p = 0.0, energy = 0.0;
    };
    auto accs = site_parallel<Acc>(conn.grid.size(), [&](std::size_t site, Acc& a) {
        const Form trff = site_trff(F, site);
        a.lhs_h += inner_product(trff, star_h).real();
        a.lhs_p += inner_product(trff, star_phi).real();
        for (int p = 0; p < F.rank; ++p) {
            for (int q = 0; q < F.rank; ++q) {
                const Form f = F.site_form(site, p, q);
                const ComplexTypeSplit split = complex_type_split(structure.I, f);
                const cplx mu = inner_product(f, omega_I) / static_cast<double>(2 * n);
                const Form f11o = split.f11 - omega_I * mu;
                a.rhs_h += sq(f11o.norm()) - sq(split.f20.norm()) - sq(split.f02.norm()) -
                           (k - 1) * 2.0 * n * norm2(mu);
                const Form2Decomposition dec = decompose2(structure, f);
                a.rhs_p += params.a[0] * sq(dec.u_I.norm()) + params.a[1] * sq(dec.u_J.norm()) +
                           params.a[2] * sq(dec.u_K.norm()) +
                           2.0 * n *
                               (params.b[0] * norm2(dec.mu_I) + params.b[1] * norm2(dec.mu_J) +
                                params.b[2] * norm2(dec.mu_K));
                a.energy += sq(f.norm());
            }
        }
    });
    Acc total;
    for (const Acc& a : accs) {
        total.lhs_h += a.lhs_h;
        total.rhs_h += a.rhs_h;
        total.lhs_p += a.lhs_p;
        total.rhs_p += a.rhs_p;
        total.energy += a.energy;
    }
    const double w = conn.grid.site_weight();

    ConditionReport rep;
    rep.add("hym_value", total.lhs_h * w);
    rep.add("phi_value", total.lhs_p * w);
    rep.add("hym_residual", std::abs(total.lhs_h - total.rhs_h) * w);
    rep.add("phi_residual", std::abs(total.lhs_p - total.rhs_p) * w);
    rep.add("total_energy", total.energy * w);
    rep.tol = tol * std::max(1.0, total.energy * w);
    rep.pass = rep.residual("hym_residual") <= rep.tol && rep.residual("phi_residual") <= rep.tol;
    return rep;
}

// ---------------------------------------------------------------------------
// Compactness experiment

ConditionReport lewis_experiment(const PeriodicGrid& grid, const Form& harmonic_class,
                                 std::uint64_t seed, const PhiLambdaParams& params, double tol) {
    validate_grid(grid);
    check_params(params);
    if (grid.dimension != 4 * params.n)
        throw structural_error("lewis_experiment: grid dimension must equal 4n");
    if (harmonic_class.dim() != grid.dimension || harmonic_class.degree() != 2)
        throw structural_error("lewis_experiment: harmonic class must be a degree-2 form on the grid dimension");
    const double cscale = std::max(1.0, harmonic_class.norm());
    if (harmonic_class.real_part().norm() > 1e-12 * cscale)
        throw domain_error("lewis_experiment: harmonic class must have purely imaginary (skew-Hermitian) coefficients");

    const HyperHermitianStructure s = quaternion_structure(params.n);
    const Form G = harmonic_class.imag_part();
    const Form2Decomposition dec = decompose2(s, G);
    const double trace_norm = std::sqrt(
        2.0 * params.n * (norm2(dec.mu_I) + norm2(dec.mu_J) + norm2(dec.mu_K)));
    if (dec.u_J.norm() > 1e-10 * cscale || dec.u_K.norm() > 1e-10 * cscale ||
        trace_norm > 1e-10 * cscale)
        throw domain_error(
            "lewis_experiment: harmonic class is not compatible (it has u_J, u_K or trace parts)");
    const bool w_class = dec.u_I.norm() <= 1e-12 * cscale;

    const double vol = grid.volume();
    const double sc1 = std::max(1.0, G.norm() * std::sqrt(vol));
    const double sc2 = std::max(1.0, sq(G.norm()) * vol);
    const Form star_phi = hodge_star(phi_lambda(s, params.lambda));
    const int band = std::max(1, std::min(grid.points / 4, grid.points / 2 - 1));

    LatticeConnection base = zero_connection(grid, 1);
    base.harmonic = {harmonic_class};
    const double phi0 = trff_pairing(curvature(base), star_phi);

    Rng rng(seed);
    double gauge_dev = 0.0;
    double match_worst = 0.0;
    double f_I_worst = 0.0;
    for (int j = 0; j < 3; ++j) {
        const std::vector<cplx> gre = random_plane_impl(grid, band, rng);
        std::vector<cplx> phi_plane(gre.size());
        for (std::size_t i = 0; i < gre.size(); ++i) phi_plane[i] = cplx(0.0, gre[i].real());
        const LatticeConnection rep = gauge_transform(base, {phi_plane});
        const LatticeField Fj = curvature(rep);
        for (int c = 0; c < Fj.components(); ++c) {
            const cplx hv = harmonic_class[c];
            for (const cplx& z : Fj.plane(c)) gauge_dev = std::max(gauge_dev, std::abs(z - hv));
        }
        struct Acc {
            double uI2 = 0.0;
        };
        auto accs = site_parallel<Acc>(grid.size(), [&](std::size_t site, Acc& a) {
            const Form2Decomposition d = decompose2(s, Fj.site_form(site).imag_part());
            a.uI2 += sq(d.u_I.norm());
        });
        double uI2 = 0.0;
        for (const Acc& a : accs) uI2 += a.uI2;
        uI2 *= grid.site_weight();
        f_I_worst = std::max(f_I_worst, std::sqrt(uI2));
        match_worst = std::max(match_worst, std::abs(params.a[0] * uI2 - trff_pairing(Fj, star_phi)));
    }

    double topo_dev = 0.0;
    for (int j = 0; j < 3; ++j) {
        LatticeConnection pert = random_connection_impl(grid, 1, band, rng);
        pert.harmonic = {harmonic_class};
        topo_dev = std::max(topo_dev, std::abs(trff_pairing(curvature(pert), star_phi) - phi0));
    }

    ConditionReport rep;
    rep.add("class_u_J", dec.u_J.norm());
    rep.add("class_u_K", dec.u_K.norm());
    rep.add("class_trace", trace_norm);
    rep.add("gauge_invariance", gauge_dev);
    rep.add("topological_invariance", topo_dev);
    rep.add("phym_energy_match", match_worst);
    rep.add("f_I_l2", f_I_worst);
    rep.add("phi_integral", phi0);
    rep.tol = tol * sc2;
    rep.pass = gauge_dev <= tol * sc1 && topo_dev <= tol * sc2 && match_worst <= tol * sc2 &&
               (!w_class || f_I_worst <= tol * sc1);
    return rep;
}

// ---------------------------------------------------------------------------
// Omega-deformed Yang-Mills

double ym_functional(const LatticeConnection& conn, const Form& Omega) {
    validate_connection(conn);
    check_omega_argument(conn.grid, Omega, "ym_functional");
    const LatticeField F = curvature(conn);
    const double energy = sq(field_l2_norm(F));
    return energy - trff_pairing(F, hodge_star(Omega));
}

FlowResult ym_gradient_flow(const LatticeConnection& conn, const Form& Omega, int steps,
                            double step_size, double tol) {
    validate_connection(conn);
    if (conn.rank != 1)
        throw structural_error("ym_gradient_flow: requires an abelian (rank 1) connection");
    check_omega_argument(conn.grid, Omega, "ym_gradient_flow");
    if (steps < 0) throw domain_error("ym_gradient_flow: steps must be nonnegative");
    if (step_size < 0.0) throw domain_error("ym_gradient_flow: step_size must be nonnegative");
    if (tol <= 0.0) throw domain_error("ym_gradient_flow: tol must be positive");

    const PeriodicGrid& g = conn.grid;
    const int N = g.dimension;
    const std::size_t n = g.size();
    const double vol = g.volume();
    const double lap_norm = static_cast<double>(N) * sq(g.points / 2.0 - 1.0);
    const double lr = step_size == 0.0 ? 0.1 / lap_norm : step_size;

    const auto kf = frequency_planes(g);
    std::vector<double> k2(n, 0.0);
    for (int nu = 0; nu < N; ++nu)
        for (std::size_t s = 0; s < n; ++s) k2[s] += sq(kf[static_cast<std::size_t>(nu)][s]);

    std::vector<std::vector<cplx>> ahat(static_cast<std::size_t>(N));
    for (int nu = 0; nu < N; ++nu) {
        ahat[static_cast<std::size_t>(nu)] = conn.potential(nu);
        transform_axes(g, ahat[static_cast<std::size_t>(nu)], true);
    }
    const Form h = conn.harmonic.empty() ? Form(N, 2) : conn.harmonic[0];
    const double h_sq = sq(h.norm());

    const Form star_Omega = hodge_star(Omega);
    const LatticeField F0 = curvature(conn);
    const double c_top = trff_pairing(F0, star_Omega);
    const double e0_honest = sq(field_l2_norm(F0));

    std::vector<std::vector<cplx>> ghat(static_cast<std::size_t>(N),
                                        std::vector<cplx>(n, cplx(0.0, 0.0)));
    std::vector<double> trace;
    double max_increase = 0.0;
    double prev = 0.0;
    for (int step = 0;; ++step) {
        // gradient ghat = |k|^2 ahat - k (k . ahat), i.e. the Fourier modes
        // of d*F for F = d(a) + harmonic.
        for (std::size_t s = 0; s < n; ++s) {
            cplx sdot(0.0, 0.0);
            for (int nu = 0; nu < N; ++nu)
                sdot += kf[static_cast<std::size_t>(nu)][s] * ahat[static_cast<std::size_t>(nu)][s];
            for (int nu = 0; nu < N; ++nu)
                ghat[static_cast<std::size_t>(nu)][s] =
                    k2[s] * ahat[static_cast<std::size_t>(nu)][s] -
                    kf[static_cast<std::size_t>(nu)][s] * sdot;
        }
        double grad_sq = 0.0;
        double da_energy = 0.0;
        for (int nu = 0; nu < N; ++nu) {
            const auto& gp = ghat[static_cast<std::size_t>(nu)];
            const auto& ap = ahat[static_cast<std::size_t>(nu)];
            grad_sq += kernels::sumsq(reinterpret_cast<const double*>(gp.data()), 2 * n);
            da_energy += kernels::cdot(ap.data(), gp.data(), n).real();
        }
        const double f_energy = vol * (da_energy + h_sq);
        const double value = f_energy - c_top;
        if (step == 0 && std::abs(f_energy - e0_honest) > 1e-6 * std::max(1.0, e0_honest))
            throw invariant_violation("ym_gradient_flow: Parseval energy disagrees with quadrature");
        if (step > 0) {
            const double slack = 1e-9 * std::max(1.0, std::abs(prev));
            if (value > prev + slack)
                throw domain_error(
                    "ym_gradient_flow: functional increased; step_size is too large (the stable "
                    "range is below 2 / (N (P/2-1)^2))");
            max_increase = std::max(max_increase, std::max(0.0, value - prev));
        }
        trace.push_back(value);
        prev = value;
        const double grad_l2 = std::sqrt(vol * grad_sq);
        if (grad_l2 <= 0.25 * tol * std::max(1.0, std::sqrt(f_energy)) || step == steps) break;
        for (int nu = 0; nu < N; ++nu)
            kernels::cmuladd(cplx(-lr, 0.0), ghat[static_cast<std::size_t>(nu)].data(),
                             ahat[static_cast<std::size_t>(nu)].data(), n);
    }

    FlowResult result;
    result.connection = conn;
    for (int nu = 0; nu < N; ++nu) {
        transform_axes(g, ahat[static_cast<std::size_t>(nu)], false);
        result.connection.potential(nu) = ahat[static_cast<std::size_t>(nu)];
    }
    result.trace = std::move(trace);

    const LatticeField Ff = curvature(result.connection);
    const double f_norm = field_l2_norm(Ff);
    const double codiff = field_l2_norm(lattice_codifferential(Ff));
    const double y_honest = sq(f_norm) - trff_pairing(Ff, star_Omega);
    const double trace_gap = std::abs(result.trace.back() - y_honest);

    struct Acc {
        double asd2 = 0.0;
    };
    auto accs = site_parallel<Acc>(n, [&](std::size_t site, Acc& a) {
        const Form f = Ff.site_form(site);
        a.asd2 += sq((hodge_star(f) + wedge(Omega, f)).norm());
    });
    double asd2 = 0.0;
    for (const Acc& a : accs) asd2 += a.asd2;
    const double omega_asd =
        f_norm > 1e-15 ? std::sqrt(asd2 * g.site_weight()) / f_norm : 0.0;

    ConditionReport& rep = result.report;
    rep.add("codifferential", codiff);
    rep.add("omega_asd", omega_asd);
    rep.add("monotone", max_increase);
    rep.add("trace_consistency", trace_gap);
    rep.add("functional_initial", result.trace.front());
    rep.add("functional_final", result.trace.back());
    const double lin_tol = tol * std::max(1.0, f_norm);
    const double quad_tol = tol * std::max(1.0, sq(f_norm));
    rep.tol = lin_tol;
    rep.pass = codiff <= lin_tol && max_increase <= quad_tol && trace_gap <= quad_tol;
    return result;
}

}  // namespace hf
