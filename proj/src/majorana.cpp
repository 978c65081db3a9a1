#include "fafkit/majorana.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace faf {

namespace {

void check_antisymmetric(const Eigen::MatrixXd& m, const char* what,
                         double tol) {
  if (m.rows() != m.cols() || m.rows() % 2 != 0)
    throw ContractError(std::string(what) + ": matrix must be 2n x 2n");
  if ((m + m.transpose()).cwiseAbs().maxCoeff() > tol)
    throw ContractError(std::string(what) + ": matrix is not antisymmetric");
}

}  // namespace

CovarianceMatrix::CovarianceMatrix(int n, Eigen::MatrixXd g)
    : n_modes(n), gamma(std::move(g)) {
  if (n < 1) throw ContractError("CovarianceMatrix: need at least 1 mode");
  if (gamma.rows() != 2 * n || gamma.cols() != 2 * n)
    throw ContractError("CovarianceMatrix: matrix must be 2n x 2n");
  check_antisymmetric(gamma, "CovarianceMatrix", 1e-9);
}

std::vector<double> CovarianceMatrix::canonical_values() const {
  const Eigen::MatrixXd m = -(gamma * gamma);  // symmetric PSD
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  const auto& vals = es.eigenvalues();  // ascending, doubly degenerate
  std::vector<double> nu(n_modes);
  for (int j = 0; j < n_modes; ++j) {
    double v = 0.5 * (vals(2 * j) + vals(2 * j + 1));
    if (v < -1e-9)
      throw Error("canonical_values: -gamma^2 has a negative eigenvalue");
    v = std::clamp(v, 0.0, 1.0);
    nu[n_modes - 1 - j] = std::sqrt(v);
  }
  return nu;
}

PauliString jw_majorana(int a, int n) {
  if (n < 1 || n > 64) throw ContractError("jw_majorana: bad mode count");
  if (a < 1 || a > 2 * n) throw ContractError("jw_majorana: index out of range");
  const int mode = (a + 1) / 2;  // 1-based
  std::vector<Pauli> ls(n, Pauli::I);
  for (int q = 0; q < mode - 1; ++q) ls[q] = Pauli::Z;
  ls[mode - 1] = (a % 2 == 1) ? Pauli::X : Pauli::Y;
  return PauliString(0, std::move(ls));
}

PauliString majorana_bilinear(int a, int b, int n) {
  if (a == b) throw ContractError("majorana_bilinear: need a != b");
  // -i g_a g_b: multiply the strings and shift the phase by i^3.
  PauliString prod = jw_majorana(a, n) * jw_majorana(b, n);
  return PauliString(prod.phase_pow() + 3, prod.letters());
}

namespace {

template <typename State>
CovarianceMatrix covariance_impl(const State& s) {
  const int n = s.n;
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (int a = 1; a <= 2 * n; ++a)
    for (int b = a + 1; b <= 2 * n; ++b) {
      const double v = expectation(s, majorana_bilinear(a, b, n)).real();
      g(a - 1, b - 1) = v;
      g(b - 1, a - 1) = -v;
    }
  return CovarianceMatrix(n, std::move(g));
}

}  // namespace

CovarianceMatrix covariance(const PureState& s) { return covariance_impl(s); }
CovarianceMatrix covariance(const MixedState& s) { return covariance_impl(s); }

double faf_k(const CovarianceMatrix& g, int k) {
  if (k < 1) throw ContractError("faf_k: k must be >= 1");
  double sum = 0.0;
  for (double nu : g.canonical_values()) sum += std::pow(nu * nu, k);
  return static_cast<double>(g.n_modes) - sum;
}

double faf_k(const PureState& s, int k) { return faf_k(covariance(s), k); }
double faf_k(const MixedState& s, int k) { return faf_k(covariance(s), k); }

double witness_faf(const MixedState& s) {
  const double f1 = faf_k(s, 1);
  const double pur = purity(s);
  const double root = std::pow(std::clamp(pur, 0.0, 1.0), 1.0 / s.n);
  return f1 - 2.0 * s.n * (1.0 - root);
}

double witness_faf(const PureState& s) { return faf_k(s, 1); }

std::pair<double, double> distance_bounds(double faf1, int n) {
  if (n < 1) throw ContractError("distance_bounds: need n >= 1");
  const double f = std::max(0.0, faf1);
  return {std::clamp(f / (4.0 * n), 0.0, 1.0), std::clamp(f / 2.0, 0.0, 1.0)};
}

PureState parity_reference(int n, Parity parity) {
  // Odd sector: first mode occupied, |10...0>.
  const uint64_t x = parity == Parity::Even ? 0 : uint64_t{1} << (n - 1);
  return PureState::basis_state(n, x);
}

namespace {

// (1/2) sum_{a<b} h_ab B_ab as a dense Hermitian matrix.
Mat bilinear_combination(const Eigen::MatrixXd& h, int n) {
  const uint64_t dim = uint64_t{1} << n;
  Mat m = Mat::Zero(dim, dim);
  for (int a = 1; a <= 2 * n; ++a)
    for (int b = a + 1; b <= 2 * n; ++b) {
      const double c = h(a - 1, b - 1);
      if (c == 0.0) continue;
      const PauliString bl = majorana_bilinear(a, b, n);
      const uint64_t flip = bl.flip_mask();
      for (uint64_t x = 0; x < dim; ++x)
        m(x ^ flip, x) += 0.5 * c * bl.coeff(x);
    }
  return m;
}

int modes_of(const Eigen::MatrixXd& h, const char* what) {
  check_antisymmetric(h, what, 1e-12);
  const int n = static_cast<int>(h.rows()) / 2;
  if (n < 1) throw ContractError(std::string(what) + ": empty generator");
  return n;
}

}  // namespace

Mat free_fermion_unitary(const Eigen::MatrixXd& h, int n) {
  if (h.rows() != 2 * n) throw ContractError("free_fermion_unitary: size");
  modes_of(h, "free_fermion_unitary");
  if (n > kMaxPureQubits) throw SizeError("free_fermion_unitary: cap exceeded");
  const Mat ham = bilinear_combination(h, n);
  Eigen::SelfAdjointEigenSolver<Mat> es(ham);
  if (es.info() != Eigen::Success)
    throw Error("free_fermion_unitary: eigensolver failed");
  const auto& lam = es.eigenvalues();
  Vec ph(lam.size());
  for (Eigen::Index i = 0; i < lam.size(); ++i)
    ph(i) = std::exp(cplx(0.0, -lam(i)));
  return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

PureState gaussian_pure(const GaussianParams& params) {
  const int n = modes_of(params.generator, "gaussian_pure");
  if (n > kMaxPureQubits) throw SizeError("gaussian_pure: cap exceeded");
  const Mat ham = bilinear_combination(params.generator, n);
  Eigen::SelfAdjointEigenSolver<Mat> es(ham);
  if (es.info() != Eigen::Success)
    throw Error("gaussian_pure: eigensolver failed");
  const uint64_t ref =
      params.parity == Parity::Even ? 0 : uint64_t{1} << (n - 1);
  // exp(-iH) e_ref = V exp(-i lam) V^dag e_ref without forming the unitary.
  Vec w = es.eigenvectors().row(ref).adjoint();
  for (Eigen::Index i = 0; i < w.size(); ++i)
    w(i) *= std::exp(cplx(0.0, -es.eigenvalues()(i)));
  Vec out = es.eigenvectors() * w;
  out /= out.norm();
  return PureState(n, std::move(out));
}

MixedState gaussian_mixed(const Eigen::MatrixXd& k_gen) {
  const int n = modes_of(k_gen, "gaussian_mixed");
  if (n > kMaxMixedQubits) throw SizeError("gaussian_mixed: cap exceeded");
  const Mat ham = bilinear_combination(k_gen, n);
  Eigen::SelfAdjointEigenSolver<Mat> es(ham);
  if (es.info() != Eigen::Success)
    throw Error("gaussian_mixed: eigensolver failed");
  const auto& lam = es.eigenvalues();
  const double shift = lam.maxCoeff();
  Eigen::VectorXd w(lam.size());
  for (Eigen::Index i = 0; i < lam.size(); ++i)
    w(i) = std::exp(lam(i) - shift);
  w /= w.sum();
  Mat rho = es.eigenvectors() * w.asDiagonal().toDenseMatrix().cast<cplx>() *
            es.eigenvectors().adjoint();
  return MixedState::unchecked(n, std::move(rho));
}

// --- distance to the pure Gaussian manifold --------------------------------

namespace {

// Fidelity |<psi| exp(-iH(h)) |ref>|^2 evaluated many times during the
// search; precomputes the sparse structure of every bilinear once.
class OverlapObjective {
 public:
  OverlapObjective(const PureState& psi, Parity parity)
      : n_(psi.n),
        dim_(psi.dim()),
        ref_(parity == Parity::Even ? 0 : psi.dim() >> 1),
        psi_(psi.amps) {
    for (int a = 1; a <= 2 * n_; ++a)
      for (int b = a + 1; b <= 2 * n_; ++b) {
        const PauliString bl = majorana_bilinear(a, b, n_);
        flips_.push_back(bl.flip_mask());
        std::vector<cplx> cs(dim_);
        for (uint64_t x = 0; x < dim_; ++x) cs[x] = bl.coeff(x);
        coeffs_.push_back(std::move(cs));
      }
    ham_.resize(dim_, dim_);
  }

  int dims() const { return static_cast<int>(flips_.size()); }

  /// Negative fidelity (minimization target).
  double operator()(const Eigen::VectorXd& h) {
    ham_.setZero();
    for (int p = 0; p < dims(); ++p) {
      const double c = 0.5 * h(p);
      if (c == 0.0) continue;
      const uint64_t flip = flips_[p];
      const auto& cs = coeffs_[p];
      for (uint64_t x = 0; x < dim_; ++x) ham_(x ^ flip, x) += c * cs[x];
    }
    es_.compute(ham_);
    Vec w = es_.eigenvectors().row(ref_).adjoint();
    for (Eigen::Index i = 0; i < w.size(); ++i)
      w(i) *= std::exp(cplx(0.0, -es_.eigenvalues()(i)));
    const cplx ov = psi_.dot(es_.eigenvectors() * w);
    return -std::norm(ov);
  }

 private:
  int n_;
  uint64_t dim_;
  uint64_t ref_;
  Vec psi_;
  std::vector<uint64_t> flips_;
  std::vector<std::vector<cplx>> coeffs_;
  Mat ham_;
  Eigen::SelfAdjointEigenSolver<Mat> es_;
};

// Standard Nelder-Mead, minimizing f. Returns the best value found once the
// simplex diameter drops below tol or the evaluation budget runs out.
template <typename F>
double nelder_mead(F& f, const Eigen::VectorXd& start, double init_step,
                   double tol, int max_evals) {
  const int d = static_cast<int>(start.size());
  std::vector<Eigen::VectorXd> xs(d + 1, start);
  std::vector<double> fs(d + 1);
  int evals = 0;
  for (int i = 1; i <= d; ++i) xs[i](i - 1) += init_step;
  for (int i = 0; i <= d; ++i) {
    fs[i] = f(xs[i]);
    ++evals;
  }
  std::vector<int> order(d + 1);
  std::iota(order.begin(), order.end(), 0);

  while (evals < max_evals) {
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return fs[a] < fs[b]; });
    const int best = order[0], worst = order[d], second = order[d - 1];

    double diam = 0.0;
    for (int i = 1; i <= d; ++i)
      diam = std::max(diam,
                      (xs[order[i]] - xs[best]).cwiseAbs().maxCoeff());
    if (diam < tol) break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(d);
    for (int i = 0; i < d; ++i) centroid += xs[order[i]];
    centroid /= d;

    const Eigen::VectorXd xr = centroid + (centroid - xs[worst]);
    const double fr = f(xr);
    ++evals;
    if (fr < fs[best]) {
      const Eigen::VectorXd xe = centroid + 2.0 * (centroid - xs[worst]);
      const double fe = f(xe);
      ++evals;
      if (fe < fr) {
        xs[worst] = xe;
        fs[worst] = fe;
      } else {
        xs[worst] = xr;
        fs[worst] = fr;
      }
    } else if (fr < fs[second]) {
      xs[worst] = xr;
      fs[worst] = fr;
    } else {
      const bool outside = fr < fs[worst];
      const Eigen::VectorXd base = outside ? xr : xs[worst];
      const Eigen::VectorXd xc = centroid + 0.5 * (base - centroid);
      const double fc = f(xc);
      ++evals;
      if (fc < std::min(fr, fs[worst])) {
        xs[worst] = xc;
        fs[worst] = fc;
      } else {
        for (int i = 1; i <= d; ++i) {
          const int idx = order[i];
          xs[idx] = xs[best] + 0.5 * (xs[idx] - xs[best]);
          fs[idx] = f(xs[idx]);
          ++evals;
        }
      }
    }
  }
  return *std::min_element(fs.begin(), fs.end());
}

}  // namespace

EpsGResult eps_g_bruteforce(const PureState& s, Rng& rng,
                            const EpsGOptions& opts) {
  if (s.n > 4) throw SizeError("eps_g_bruteforce: capped at n <= 4");
  OverlapObjective even(s, Parity::Even);
  OverlapObjective odd(s, Parity::Odd);
  const int d = even.dims();

  EpsGResult res;
  res.best_fidelity = 0.0;
  const double pi = 3.14159265358979323846;
  for (int r = 0; r < opts.restarts; ++r) {
    Eigen::VectorXd start(d);
    for (int i = 0; i < d; ++i) start(i) = rng.uniform(-pi, pi);
    for (Parity parity : {Parity::Even, Parity::Odd}) {
      OverlapObjective& obj = parity == Parity::Even ? even : odd;
      const double fval = nelder_mead(obj, start, 0.5, opts.simplex_tol,
                                      opts.max_evals_per_restart);
      if (-fval > res.best_fidelity) {
        res.best_fidelity = -fval;
        res.best_parity = parity;
      }
    }
    res.restarts_run = r + 1;
    if (opts.stop_fidelity && res.best_fidelity >= *opts.stop_fidelity) break;
  }
  res.eps_g = std::sqrt(std::max(0.0, 1.0 - res.best_fidelity));
  return res;
}

}  // namespace faf
