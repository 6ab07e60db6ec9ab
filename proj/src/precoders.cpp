#include "cia/precoders.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>

#include "cia/power.hpp"
#include "cia/rng.hpp"
#include "cia/signal_model.hpp"

namespace cia {

namespace {

constexpr double kRankTol = 1e-9;        // relative singular-value cutoff
constexpr double kPivotTol = 1e-12;      // Gram-Schmidt pivot floor
constexpr double kAlignGateRel = 1e-11;  // construction gate vs ||H_conv||_F
// Companion eigensolvers split a genuine double root by about sqrt(eps);
// the cluster tolerance sits above that so multiplicities are recognized.
constexpr double kRootClusterTol = 1e-6;

/// Unit-norm Vandermonde-derivative column (1, a, a^2, ...)^(d) built without
/// overflow: for |a| > 1 the powers are referenced to the top entry.
VectorXcd vandermonde_column(Complex a, int length, int deriv_order) {
  VectorXcd v = VectorXcd::Zero(length);
  const double aa = std::abs(a);
  if (aa <= 1.0) {
    // p_j = j(j-1)...(j-d+1) a^(j-d)
    Complex pw = 1.0;  // a^(j-d) built incrementally from j = d
    for (int j = deriv_order; j < length; ++j) {
      double coef = 1.0;
      for (int t = 0; t < deriv_order; ++t) coef *= static_cast<double>(j - t);
      v[j] = coef * pw;
      pw *= a;
    }
  } else {
    const Complex phase = a / aa;
    const double log_aa = std::log(aa);
    Complex ph = 1.0;  // phase^(j-d)
    for (int j = deriv_order; j < length; ++j) {
      double coef = 1.0;
      for (int t = 0; t < deriv_order; ++t) coef *= static_cast<double>(j - t);
      // |a|^(j-d) referenced to |a|^(length-1) so the largest entry stays O(1)
      const double mag = std::exp((j - deriv_order - (length - 1)) * log_aa);
      v[j] = coef * mag * ph;
      ph *= phase;
    }
  }
  const double nrm = v.norm();
  if (!std::isfinite(nrm) || nrm == 0.0)
    throw VfdmDegenerate(VfdmDegenerate::Reason::NonFiniteColumn,
                         "vfdm: non-finite Vandermonde column");
  return v / nrm;
}

}  // namespace

KernelBasis kernel_basis(const ReducedChannel& h_sp_reduced) {
  const auto& h = h_sp_reduced.matrix;
  const int n = static_cast<int>(h.rows());
  const int m = static_cast<int>(h.cols());
  if (m <= n) throw DimensionMismatch("kernel_basis: reduced channel has no null space");
  Eigen::BDCSVD<MatrixXcd> svd(h, Eigen::ComputeFullV);
  const VectorXd sv = svd.singularValues();
  const double tol = kRankTol * sv[0];
  if (sv[n - 1] <= tol)
    throw DegenerateChannel("kernel_basis: interference channel is rank deficient");
  KernelBasis out;
  out.basis = svd.matrixV().rightCols(m - n);
  return out;
}

std::pair<Precoder, VectorXd> cia_precoder(const KernelBasis& v,
                                           const ReducedChannel& h_ss_reduced,
                                           const MatrixXcd& s_eta) {
  if (h_ss_reduced.cols() != v.basis.rows())
    throw DimensionMismatch("cia_precoder: basis and channel disagree");
  const MatrixXcd w = whiten(s_eta);
  const MatrixXcd g = w * h_ss_reduced.matrix * v.basis;
  Eigen::BDCSVD<MatrixXcd> svd(g, Eigen::ComputeThinV);
  const VectorXd sv = svd.singularValues();  // descending
  Precoder p;
  p.kind = PrecoderKind::CiaOptimal;
  p.rotation = svd.matrixV();
  p.matrix = v.basis * p.rotation;
  return {std::move(p), sv.array().square().matrix()};
}

std::vector<Complex> channel_polynomial_roots(const ChannelRealization& ch) {
  const int l = ch.order();
  if (l < 1) throw std::invalid_argument("channel_polynomial_roots: need order >= 1");
  const Complex h0 = ch.taps[0];
  double max_tap = 0.0;
  for (const auto& t : ch.taps) max_tap = std::max(max_tap, std::abs(t));
  if (std::abs(h0) < 1e-250 || std::abs(h0) < 1e-280 * max_tap)
    throw VfdmDegenerate(VfdmDegenerate::Reason::NonFiniteColumn,
                         "vfdm: leading tap numerically zero, polynomial deflates");

  // companion of z^l + (h_1/h_0) z^(l-1) + ... + (h_l/h_0)
  MatrixXcd c = MatrixXcd::Zero(l, l);
  for (int i = 1; i < l; ++i) c(i, i - 1) = 1.0;
  for (int i = 0; i < l; ++i) c(i, l - 1) = -ch.taps[l - i] / h0;
  Eigen::ComplexEigenSolver<MatrixXcd> es(c, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success)
    throw VfdmDegenerate(VfdmDegenerate::Reason::NonFiniteColumn,
                         "vfdm: companion eigensolver failed");

  std::vector<Complex> roots(l);
  for (int i = 0; i < l; ++i) roots[i] = es.eigenvalues()[i];

  // Deterministic pivot-balancing order: sort canonically, then shuffle with
  // a permutation seeded from the tap bit patterns. Sorted orders funnel the
  // whole Gram volume collapse into the last pivots of clustered roots; a
  // balanced order keeps far more realizations above the pivot floor.
  std::sort(roots.begin(), roots.end(), [](const Complex& a, const Complex& b) {
    const double ma = std::abs(a), mb = std::abs(b);
    if (ma != mb) return ma > mb;
    return std::arg(a) < std::arg(b);
  });
  Rng shuffle_rng(fnv1a64(ch.taps.data(), ch.taps.size() * sizeof(Complex)));
  const auto perm = shuffle_rng.permutation(l);
  std::vector<Complex> out(l);
  for (int i = 0; i < l; ++i) out[i] = roots[perm[i]];
  return out;
}

Precoder vfdm_root_precoder(const ChannelRealization& h_sp, const OfdmConfig& cfg) {
  return vfdm_root_precoder(h_sp, cfg, reduced_channel(h_sp, cfg));
}

Precoder vfdm_root_precoder(const ChannelRealization& h_sp, const OfdmConfig& cfg,
                            const ReducedChannel& h_sp_reduced) {
  cfg.validate();
  const int l = h_sp.order();
  if (l != cfg.cp_len)
    throw std::invalid_argument("vfdm_root_precoder: requires channel order l == L");
  const int m = cfg.block_len();

  auto roots = channel_polynomial_roots(h_sp);

  // Confluent handling: roots coinciding within tolerance form a cluster
  // whose members contribute derivative columns at the cluster mean instead
  // of duplicate ones (the mean cancels the symmetric eigensolver split).
  std::vector<int> cluster(l, -1);
  std::vector<int> deriv_order(l, 0);
  int n_clusters = 0;
  for (int i = 0; i < l; ++i) {
    for (int j = 0; j < i; ++j) {
      const double scale = std::max({1.0, std::abs(roots[i]), std::abs(roots[j])});
      if (std::abs(roots[i] - roots[j]) <= kRootClusterTol * scale) {
        cluster[i] = cluster[j];
        break;
      }
    }
    if (cluster[i] < 0) cluster[i] = n_clusters++;
  }
  std::vector<Complex> mean(n_clusters, Complex(0, 0));
  std::vector<int> count(n_clusters, 0);
  for (int i = 0; i < l; ++i) {
    mean[cluster[i]] += roots[i];
    ++count[cluster[i]];
  }
  for (int c = 0; c < n_clusters; ++c) mean[c] /= static_cast<double>(count[c]);
  std::vector<int> seen(n_clusters, 0);
  for (int i = 0; i < l; ++i) {
    if (count[cluster[i]] > 1) roots[i] = mean[cluster[i]];
    deriv_order[i] = seen[cluster[i]]++;
  }

  MatrixXcd cols(m, l);
  for (int i = 0; i < l; ++i) cols.col(i) = vandermonde_column(roots[i], m, deriv_order[i]);

  // Modified Gram-Schmidt with one re-orthogonalization pass.
  MatrixXcd q(m, l);
  for (int i = 0; i < l; ++i) {
    VectorXcd v = cols.col(i);
    for (int pass = 0; pass < 2; ++pass)
      for (int j = 0; j < i; ++j) v -= q.col(j) * (q.col(j).dot(v));
    const double piv = v.norm();
    if (!(piv >= kPivotTol))
      throw VfdmDegenerate(
          VfdmDegenerate::Reason::PivotUnderflow,
          "vfdm: Gram-Schmidt pivot underflow at column " + std::to_string(i));
    q.col(i) = v / piv;
  }

  // Alignment gate: the construction must place every stream in the null
  // space of the interference channel to working precision.
  double tap_norm_sq = 0.0;
  for (const auto& t : h_sp.taps) tap_norm_sq += std::norm(t);
  const double h_conv_norm = std::sqrt(static_cast<double>(m) * tap_norm_sq);
  const double leak = (h_sp_reduced.matrix * q).norm();
  if (leak > kAlignGateRel * h_conv_norm)
    throw VfdmDegenerate(VfdmDegenerate::Reason::AlignmentGate,
                         "vfdm: orthonormalized basis leaks out of the null space");

  Precoder p;
  p.kind = PrecoderKind::VfdmRoot;
  p.matrix = std::move(q);
  p.rotation = MatrixXcd::Identity(l, l);
  return p;
}

Precoder nonunitary_baseline(const KernelBasis& v, std::uint64_t rng_seed) {
  const int l = static_cast<int>(v.basis.cols());
  Rng rng(rng_seed);

  // Haar-distributed unitary from Gram-Schmidt on a Gaussian matrix.
  MatrixXcd z(l, l);
  for (int i = 0; i < l; ++i)
    for (int j = 0; j < l; ++j) z(i, j) = rng.complex_normal();
  MatrixXcd qu(l, l);
  for (int i = 0; i < l; ++i) {
    VectorXcd col = z.col(i);
    for (int pass = 0; pass < 2; ++pass)
      for (int j = 0; j < i; ++j) col -= qu.col(j) * (qu.col(j).dot(col));
    qu.col(i) = col / col.norm();
  }

  // Perturb off unitarity and renormalize columns. The perturbation scale
  // keeps the Gram matrix visibly non-orthogonal (off-diagonals around 0.15
  // for L = 32) while the comparator stays within the same power budget.
  constexpr double kPerturbation = 0.25;
  MatrixXcd gamma = qu;
  const double col_scale = kPerturbation / std::sqrt(static_cast<double>(l));
  for (int i = 0; i < l; ++i)
    for (int j = 0; j < l; ++j) gamma(i, j) += col_scale * rng.complex_normal();
  for (int i = 0; i < l; ++i) gamma.col(i) /= gamma.col(i).norm();

  Precoder p;
  p.kind = PrecoderKind::NonUnitary;
  p.rotation = gamma;
  p.matrix = v.basis * gamma;
  return p;
}

}  // namespace cia
