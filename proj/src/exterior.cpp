#include "hyperforge/exterior.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>

namespace hf {

namespace {

struct BasisTables {
  // masks[N][k]: all N-bit masks of popcount k, increasing.
  std::array<std::array<std::vector<std::uint32_t>, kMaxDim + 1>, kMaxDim + 1> masks;
  // rank[N][m]: position of mask m within masks[N][popcount(m)].
  std::array<std::vector<std::int32_t>, kMaxDim + 1> rank;
  std::array<std::array<int, kMaxDim + 1>, kMaxDim + 1> binom{};

  BasisTables() {
    for (int n = 0; n <= kMaxDim; ++n) {
      binom[n][0] = 1;
      for (int k = 1; k <= n; ++k)
        binom[n][k] = binom[n - 1][k - 1] + (k <= n - 1 ? binom[n - 1][k] : 0);
    }
    for (int n = 0; n <= kMaxDim; ++n) {
      rank[n].assign(std::size_t{1} << n, -1);
      for (std::uint32_t m = 0; m < (1u << n); ++m) {
        const int k = std::popcount(m);
        rank[n][m] = static_cast<std::int32_t>(masks[n][k].size());
        masks[n][k].push_back(m);
      }
    }
  }
};

const BasisTables& tables() {
  static const BasisTables t;  // thread-safe one-time init
  return t;
}

void require_same_shape(const Form& a, const Form& b, const char* op) {
  if (a.dim() != b.dim() || a.degree() != b.degree())
    throw structural_error(std::string(op) + ": mismatched form shapes");
}

}  // namespace

int choose(int n, int k) {
  if (n < 0 || n > kMaxDim) throw structural_error("choose: n out of range");
  if (k < 0 || k > n) return 0;
  return tables().binom[n][k];
}

const std::vector<std::uint32_t>& degree_masks(int N, int k) {
  if (N < 0 || N > kMaxDim || k < 0 || k > N)
    throw structural_error("degree_masks: bad (N, k)");
  return tables().masks[N][k];
}

int mask_rank(int N, std::uint32_t mask) {
  if (N < 0 || N > kMaxDim || mask >= (1u << N))
    throw structural_error("mask_rank: mask out of range");
  return tables().rank[N][mask];
}

int merge_sign(std::uint32_t a, std::uint32_t b) {
  int inv = 0;
  for (std::uint32_t bb = b; bb; bb &= bb - 1) {
    const int j = std::countr_zero(bb);
    inv += std::popcount(a >> (j + 1));
  }
  return (inv & 1) ? -1 : 1;
}

Form::Form(int N, int k) : N_(N), k_(k) {
  if (N < 0 || N > kMaxDim) throw structural_error("Form: dimension out of range");
  if (k < 0) throw structural_error("Form: negative degree");
  c_.assign(static_cast<std::size_t>(k <= N ? choose(N, k) : 0), cplx{0.0, 0.0});
}

Form Form::scalar(int N, cplx value) {
  Form f(N, 0);
  f.c_[0] = value;
  return f;
}

Form Form::basis(int N, std::initializer_list<int> idx) {
  return basis(N, std::vector<int>(idx));
}

Form Form::basis(int N, const std::vector<int>& idx) {
  Form f(N, static_cast<int>(idx.size()));
  std::uint32_t m = 0;
  int prev = 0;
  for (int i : idx) {
    if (i <= prev || i > N)
      throw structural_error("Form::basis: indices must be strictly increasing in 1..N");
    m |= 1u << (i - 1);
    prev = i;
  }
  f.set_coeff(m, cplx{1.0, 0.0});
  return f;
}

Form Form::volume(int N) {
  Form f(N, N);
  f.c_[0] = cplx{1.0, 0.0};
  return f;
}

cplx Form::coeff(std::uint32_t mask) const {
  if (std::popcount(mask) != k_) return cplx{0.0, 0.0};
  return c_[static_cast<std::size_t>(mask_rank(N_, mask))];
}

void Form::add_coeff(std::uint32_t mask, cplx v) {
  if (std::popcount(mask) != k_)
    throw structural_error("Form::add_coeff: mask degree mismatch");
  c_[static_cast<std::size_t>(mask_rank(N_, mask))] += v;
}

void Form::set_coeff(std::uint32_t mask, cplx v) {
  if (std::popcount(mask) != k_)
    throw structural_error("Form::set_coeff: mask degree mismatch");
  c_[static_cast<std::size_t>(mask_rank(N_, mask))] = v;
}

Form& Form::operator+=(const Form& o) {
  require_same_shape(*this, o, "Form::+=");
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
  return *this;
}

Form& Form::operator-=(const Form& o) {
  require_same_shape(*this, o, "Form::-=");
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
  return *this;
}

Form& Form::operator*=(cplx s) {
  for (auto& v : c_) v *= s;
  return *this;
}

Form Form::operator-() const {
  Form r = *this;
  for (auto& v : r.c_) v = -v;
  return r;
}

Form Form::real_part() const {
  Form r = *this;
  for (auto& v : r.c_) v = cplx{v.real(), 0.0};
  return r;
}

Form Form::imag_part() const {
  Form r = *this;
  for (auto& v : r.c_) v = cplx{v.imag(), 0.0};
  return r;
}

Form Form::conjugate() const {
  Form r = *this;
  for (auto& v : r.c_) v = std::conj(v);
  return r;
}

double Form::norm() const {
  double s = 0.0;
  for (const auto& v : c_) s += std::norm(v);
  return std::sqrt(s);
}

Form operator+(Form a, const Form& b) { return a += b; }
Form operator-(Form a, const Form& b) { return a -= b; }
Form operator*(cplx s, Form a) { return a *= s; }
Form operator*(Form a, cplx s) { return a *= s; }

Form wedge(const Form& a, const Form& b) {
  if (a.dim() != b.dim()) throw structural_error("wedge: dimension mismatch");
  const int N = a.dim();
  Form out(N, a.degree() + b.degree());
  if (out.size() == 0) return out;  // degree exceeds N: identically zero
  const auto& ma = degree_masks(N, a.degree());
  const auto& mb = degree_masks(N, b.degree());
  for (std::size_t ia = 0; ia < ma.size(); ++ia) {
    const cplx ca = a[static_cast<int>(ia)];
    if (ca == cplx{0.0, 0.0}) continue;
    for (std::size_t ib = 0; ib < mb.size(); ++ib) {
      const cplx cb = b[static_cast<int>(ib)];
      if (cb == cplx{0.0, 0.0}) continue;
      const std::uint32_t A = ma[ia], B = mb[ib];
      if (A & B) continue;
      out.add_coeff(A | B, static_cast<double>(merge_sign(A, B)) * ca * cb);
    }
  }
  return out;
}

Form wedge_power(const Form& a, int p) {
  if (p < 0) throw structural_error("wedge_power: negative exponent");
  Form acc = Form::scalar(a.dim(), cplx{1.0, 0.0});
  for (int i = 0; i < p; ++i) acc = wedge(acc, a);
  return acc;
}

Form hodge_star(const Form& a) {
  const int N = a.dim(), k = a.degree();
  if (k > N) throw structural_error("hodge_star: degree exceeds dimension");
  const std::uint32_t full = (N == 32) ? ~0u : ((1u << N) - 1u);
  Form out(N, N - k);
  const auto& ms = degree_masks(N, k);
  for (std::size_t i = 0; i < ms.size(); ++i) {
    const cplx c = a[static_cast<int>(i)];
    if (c == cplx{0.0, 0.0}) continue;
    const std::uint32_t m = ms[i], mc = full & ~m;
    out.add_coeff(mc, static_cast<double>(merge_sign(m, mc)) * c);
  }
  return out;
}

Form interior_product(const Eigen::VectorXd& v, const Form& a) {
  const int N = a.dim(), k = a.degree();
  if (v.size() != N) throw structural_error("interior_product: vector dimension mismatch");
  if (k == 0) return Form(N, 0);
  Form out(N, k - 1);
  const auto& ms = degree_masks(N, k);
  for (std::size_t t = 0; t < ms.size(); ++t) {
    const cplx c = a[static_cast<int>(t)];
    if (c == cplx{0.0, 0.0}) continue;
    for (std::uint32_t mm = ms[t]; mm; mm &= mm - 1) {
      const int i = std::countr_zero(mm);
      const double vi = v[i];
      if (vi == 0.0) continue;
      const int below = std::popcount(ms[t] & ((1u << i) - 1u));
      const double sign = (below & 1) ? -1.0 : 1.0;
      out.add_coeff(ms[t] & ~(1u << i), sign * vi * c);
    }
  }
  return out;
}

cplx inner_product(const Form& a, const Form& b) {
  require_same_shape(a, b, "inner_product");
  cplx s{0.0, 0.0};
  for (int i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

cplx hermitian_inner(const Form& a, const Form& b) {
  require_same_shape(a, b, "hermitian_inner");
  cplx s{0.0, 0.0};
  for (int i = 0; i < a.size(); ++i) s += a[i] * std::conj(b[i]);
  return s;
}

Form pullback(const Eigen::MatrixXd& T, const Form& a) {
  const int Nt = static_cast<int>(T.rows());
  const int Ns = static_cast<int>(T.cols());
  if (a.dim() != Nt) throw structural_error("pullback: form does not live on the target space");
  if (Ns < 0 || Ns > kMaxDim) throw structural_error("pullback: source dimension out of range");
  const int k = a.degree();
  Form out(Ns, k);
  if (k == 0) {
    out.set_coeff(0, a.coeff(0));
    return out;
  }
  if (out.size() == 0) return out;

  const auto& src = degree_masks(Ns, k);
  const auto& tgt = degree_masks(Nt, k);

  std::vector<int> rows(static_cast<std::size_t>(k)), cols(static_cast<std::size_t>(k));
  Eigen::MatrixXd minor(k, k);
  for (std::size_t it = 0; it < tgt.size(); ++it) {
    const cplx cM = a[static_cast<int>(it)];
    if (cM == cplx{0.0, 0.0}) continue;
    int r = 0;
    for (std::uint32_t mm = tgt[it]; mm; mm &= mm - 1) rows[static_cast<std::size_t>(r++)] = std::countr_zero(mm);
    for (std::size_t is = 0; is < src.size(); ++is) {
      int c = 0;
      for (std::uint32_t mm = src[is]; mm; mm &= mm - 1) cols[static_cast<std::size_t>(c++)] = std::countr_zero(mm);
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) minor(i, j) = T(rows[static_cast<std::size_t>(i)], cols[static_cast<std::size_t>(j)]);
      const double det = minor.determinant();
      if (det != 0.0) out.add_coeff(src[is], det * cM);
    }
  }
  return out;
}

bool approx_equal(const Form& a, const Form& b, double rel, double abs_floor) {
  require_same_shape(a, b, "approx_equal");
  const double scale = std::max(a.norm(), b.norm());
  return (a - b).norm() <= std::max(abs_floor, rel * scale);
}

}  // namespace hf
