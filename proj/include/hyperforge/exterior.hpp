#pragma once

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <vector>

#include <Eigen/Dense>

#include "hyperforge/errors.hpp"

// Exterior algebra over R^N with the standard orthonormal coframe e^1..e^N,
// N <= 16.  A degree-k form is a dense vector of complex coefficients over
// the C(N,k) increasing index tuples; each tuple is encoded as an N-bit mask
// (bit i-1 set means index i participates), and the dense layout is ordered
// by increasing mask value.  All sign bookkeeping reduces to counting merge
// inversions between masks with popcount tricks.
//
// Conventions fixed here and relied on everywhere else:
//   - metric: e^1..e^N orthonormal;
//   - orientation: vol = e^1 ^ ... ^ e^N;
//   - hodge_star:  *e_S = sign(S, S^c) e_{S^c}  (so *1 = vol, **a = (-1)^{k(N-k)} a);
//   - inner_product is the bilinear pairing  <a,b> vol = a ^ *b  (no conjugation);
//   - norms and residuals use the Hermitian pairing  <a, conj(b)>.

namespace hf {

using cplx = std::complex<double>;

constexpr int kMaxDim = 16;

// Binomial coefficient for 0 <= n <= kMaxDim.
int choose(int n, int k);

// All N-bit masks of popcount k in increasing order.
const std::vector<std::uint32_t>& degree_masks(int N, int k);

// Position of mask within degree_masks(N, popcount(mask)).
int mask_rank(int N, std::uint32_t mask);

// Sign of the permutation sorting the concatenation (sorted a, sorted b).
// Masks must be disjoint.
int merge_sign(std::uint32_t a, std::uint32_t b);

class Form {
 public:
  Form() = default;
  Form(int N, int k);  // zero form of degree k on R^N

  static Form scalar(int N, cplx value);                       // degree 0
  static Form basis(int N, std::initializer_list<int> idx);    // e^{i1..ik}, 1-based
  static Form basis(int N, const std::vector<int>& idx);
  static Form volume(int N);

  int dim() const { return N_; }
  int degree() const { return k_; }
  int size() const { return static_cast<int>(c_.size()); }

  const std::vector<cplx>& coeffs() const { return c_; }
  std::vector<cplx>& coeffs() { return c_; }
  cplx& operator[](int i) { return c_[static_cast<std::size_t>(i)]; }
  const cplx& operator[](int i) const { return c_[static_cast<std::size_t>(i)]; }

  cplx coeff(std::uint32_t mask) const;         // coefficient of e_mask
  void add_coeff(std::uint32_t mask, cplx v);   // accumulate onto e_mask
  void set_coeff(std::uint32_t mask, cplx v);

  Form& operator+=(const Form& o);
  Form& operator-=(const Form& o);
  Form& operator*=(cplx s);
  Form operator-() const;

  Form real_part() const;
  Form imag_part() const;
  Form conjugate() const;

  double norm() const;  // Hermitian (Frobenius) norm of the coefficient vector
  bool is_zero(double tol = 1e-12) const { return norm() <= tol; }

 private:
  int N_ = 0;
  int k_ = 0;
  std::vector<cplx> c_;
};

Form operator+(Form a, const Form& b);
Form operator-(Form a, const Form& b);
Form operator*(cplx s, Form a);
Form operator*(Form a, cplx s);

// Graded product; degrees add, forms above degree N vanish identically.
Form wedge(const Form& a, const Form& b);
Form wedge_power(const Form& a, int p);  // a^p (p >= 0); a^0 = 1

// Hodge star for the orthonormal coframe and orientation e^1..e^N.
Form hodge_star(const Form& a);

// Contraction v ⌟ a with a vector in the frame dual to e^1..e^N.
Form interior_product(const Eigen::VectorXd& v, const Form& a);

// Bilinear pairing extended complex-bilinearly: <a,b> vol = a ^ *b.
cplx inner_product(const Form& a, const Form& b);

// Hermitian pairing <a, conj(b)>; hermitian_inner(a,a).real() == norm(a)^2.
cplx hermitian_inner(const Form& a, const Form& b);

// Pullback along the linear map with matrix T (rows: target components,
// cols: source components): (pullback(T,a))(v_1..v_k) = a(Tv_1 .. Tv_k).
// The result lives on the source space (dim = T.cols()); a must live on the
// target space (dim = T.rows()).
Form pullback(const Eigen::MatrixXd& T, const Form& a);

// ||a - b|| <= max(abs_floor, rel * max(||a||, ||b||)).
bool approx_equal(const Form& a, const Form& b, double rel = 1e-10,
                  double abs_floor = 1e-12);

}  // namespace hf
