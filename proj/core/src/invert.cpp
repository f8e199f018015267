#include "wifield/invert.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <Eigen/Cholesky>

#include "wifield/error.hpp"
#include "wifield/parallel.hpp"

namespace wifield {

namespace {

constexpr double kNormEps = 1e-12;
constexpr double kProbClamp = 1e-12;
// Below this spread relative to max |chi| the min-max map mostly amplifies optimizer noise.
// Gradient norm treated as stationary; roundoff at an exact fit sits far below it.
constexpr double kStationaryGradient = 1e-10;

constexpr double kDegenerateSpread = 5e-2;
constexpr double kGramRcond = 1e-13;

void check_indicator(const std::vector<std::uint8_t>& indicator, std::size_t cells) {
  if (indicator.size() != cells) {
    throw ConfigError("indicator length does not match the cell count");
  }
  for (std::uint8_t v : indicator) {
    if (v > 1) {
      throw ConfigError("indicator must be binary");
    }
  }
}

struct MinMax {
  double lo;
  double scale;  // max - min + eps
};

MinMax min_max(const Eigen::VectorXd& mag) {
  const double lo = mag.minCoeff();
  return {lo, mag.maxCoeff() - lo + kNormEps};
}

}  // namespace

MatrixXc born_operator(const ToneOperators& op) {
  const Eigen::Index p_count = op.ei_cells.rows();
  const Eigen::Index q_count = op.go.rows();
  MatrixXc b(p_count * q_count, op.go.cols());
  for (Eigen::Index p = 0; p < p_count; ++p) {
    b.middleRows(p * q_count, q_count) = op.go * op.ei_cells.row(p).asDiagonal();
  }
  return b;
}

ContrastGrid born_invert(const MatrixXc& e_s, const OperatorSet& ops, std::size_t tone, double alpha) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw ConfigError("born_invert: alpha must be finite and non-negative");
  }
  const ToneOperators& op = ops.tones.at(tone);
  if (e_s.rows() != op.ei_cells.rows() || e_s.cols() != op.go.rows()) {
    throw ConfigError("born_invert: scattered-field matrix must be P x Q");
  }
  const MatrixXc b = born_operator(op);
  VectorXc e(b.rows());
  for (Eigen::Index p = 0; p < e_s.rows(); ++p) {
    e.segment(p * e_s.cols(), e_s.cols()) = e_s.row(p).transpose();
  }
  const bool primal = b.rows() >= b.cols();
  MatrixXc gram = primal ? MatrixXc(b.adjoint() * b) : MatrixXc(b * b.adjoint());
  gram.diagonal().array() += alpha;
  const Eigen::LLT<MatrixXc> llt(gram);
  if (llt.info() != Eigen::Success || (alpha == 0.0 && !(llt.rcond() > kGramRcond))) {
    std::ostringstream msg;
    msg << "born_invert: normal equations are rank deficient";
    if (llt.info() == Eigen::Success) {
      msg << " (reciprocal condition " << llt.rcond() << ")";
    }
    msg << "; use alpha > 0";
    throw NumericError(msg.str());
  }
  ContrastGrid out{ops.domain, {}};
  if (primal) {
    out.chi = llt.solve(b.adjoint() * e);
  } else {
    out.chi = b.adjoint() * llt.solve(e);
  }
  return out;
}

double bce_regularizer(const VectorXc& chi, const std::vector<std::uint8_t>& indicator) {
  check_indicator(indicator, static_cast<std::size_t>(chi.size()));
  const Eigen::VectorXd mag = chi.cwiseAbs();
  const MinMax mm = min_max(mag);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < mag.size(); ++i) {
    const double p = std::clamp((mag[i] - mm.lo) / mm.scale, kProbClamp, 1.0 - kProbClamp);
    sum -= indicator[static_cast<std::size_t>(i)] != 0 ? std::log(p) : std::log1p(-p);
  }
  return sum / static_cast<double>(mag.size());
}

VectorXc bce_gradient(const VectorXc& chi, const std::vector<std::uint8_t>& indicator) {
  check_indicator(indicator, static_cast<std::size_t>(chi.size()));
  const Eigen::VectorXd mag = chi.cwiseAbs();
  const MinMax mm = min_max(mag);
  const double inv_n = 1.0 / static_cast<double>(mag.size());
  VectorXc grad = VectorXc::Zero(chi.size());
  if (mm.scale - kNormEps <= kDegenerateSpread * mag.maxCoeff()) {
    return grad;
  }
  for (Eigen::Index i = 0; i < mag.size(); ++i) {
    const double f = (mag[i] - mm.lo) / mm.scale;
    if (f <= kProbClamp || f >= 1.0 - kProbClamp || mag[i] == 0.0) {
      continue;
    }
    const double dp = indicator[static_cast<std::size_t>(i)] != 0 ? -1.0 / f : 1.0 / (1.0 - f);
    grad[i] = inv_n * dp / mm.scale * (chi[i] / mag[i]);
  }
  return grad;
}

PhaselessProblem::PhaselessProblem(const ToneOperators& op, Eigen::MatrixXd measured_sq, double alpha,
                                   std::optional<std::vector<std::uint8_t>> indicator)
    : b_(born_operator(op)),
      tx_(static_cast<std::size_t>(op.ei_cells.rows())),
      rx_(static_cast<std::size_t>(op.go.rows())),
      alpha_(alpha),
      indicator_(std::move(indicator)) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw ConfigError("phaseless: alpha must be finite and non-negative");
  }
  if (static_cast<std::size_t>(measured_sq.rows()) != tx_ || static_cast<std::size_t>(measured_sq.cols()) != rx_) {
    throw ConfigError("phaseless: measurements must be P x Q");
  }
  if (indicator_) {
    check_indicator(*indicator_, cell_count());
  }
  const auto q = static_cast<Eigen::Index>(rx_);
  e_inc_.resize(b_.rows());
  m_.resize(b_.rows());
  for (Eigen::Index p = 0; p < static_cast<Eigen::Index>(tx_); ++p) {
    e_inc_.segment(p * q, q) = op.ei_rx.row(p).transpose();
    const double mean = measured_sq.row(p).mean();
    if (!(mean > 0.0) || !std::isfinite(mean)) {
      throw NumericError("phaseless: measured amplitudes of a transmitter have zero mean");
    }
    m_.segment(p * q, q) = measured_sq.row(p).transpose() / mean;
  }
}

double PhaselessProblem::objective(const VectorXc& chi) const { return objective_and_gradient(chi, nullptr); }

double PhaselessProblem::objective_and_gradient(const VectorXc& chi, VectorXc* grad) const {
  if (static_cast<std::size_t>(chi.size()) != cell_count()) {
    throw ConfigError("phaseless: contrast length mismatch");
  }
  const auto q = static_cast<Eigen::Index>(rx_);
  const VectorXc z = b_ * chi + e_inc_;
  const Eigen::VectorXd a = z.cwiseAbs2();
  double value = 0.0;
  VectorXc wz(z.size());
  for (Eigen::Index p = 0; p < static_cast<Eigen::Index>(tx_); ++p) {
    const auto seg = a.segment(p * q, q);
    const double mean = seg.mean();
    if (!(mean > 0.0)) {
      throw NumericError("phaseless: modelled amplitudes have zero mean");
    }
    const Eigen::VectorXd u = seg / mean;
    const Eigen::VectorXd r = u - m_.segment(p * q, q);
    value += r.squaredNorm();
    if (grad != nullptr) {
      // dF/dA_k = (2 / mean) (r_k - mean_j(r_j u_j))
      const double ru = r.dot(u) / static_cast<double>(q);
      const Eigen::VectorXd w = (2.0 / mean) * (r.array() - ru).matrix();
      wz.segment(p * q, q) = w.cast<cplx>().cwiseProduct(z.segment(p * q, q));
    }
  }
  if (grad != nullptr) {
    *grad = 2.0 * (b_.adjoint() * wz);
  }
  if (indicator_ && alpha_ > 0.0) {
    value += alpha_ * bce_regularizer(chi, *indicator_);
    if (grad != nullptr) {
      *grad += alpha_ * bce_gradient(chi, *indicator_);
    }
  }
  return value;
}

double phaseless_objective(const VectorXc& chi, const Eigen::MatrixXd& measured_sq, const ToneOperators& op,
                           double alpha, const std::vector<std::uint8_t>* indicator) {
  std::optional<std::vector<std::uint8_t>> ind;
  if (indicator != nullptr) {
    ind = *indicator;
  }
  return PhaselessProblem(op, measured_sq, alpha, std::move(ind)).objective(chi);
}

Eigen::VectorXd phaseless_gradient(const VectorXc& chi, const Eigen::MatrixXd& measured_sq, const ToneOperators& op,
                                   double alpha, const std::vector<std::uint8_t>* indicator) {
  std::optional<std::vector<std::uint8_t>> ind;
  if (indicator != nullptr) {
    ind = *indicator;
  }
  VectorXc g;
  PhaselessProblem(op, measured_sq, alpha, std::move(ind)).objective_and_gradient(chi, &g);
  Eigen::VectorXd out(2 * g.size());
  out.head(g.size()) = g.real();
  out.tail(g.size()) = g.imag();
  return out;
}

std::string to_string(OptimizerKind kind) { return kind == OptimizerKind::Adam ? "adam" : "lbfgs"; }

OptimizerKind parse_optimizer(std::string_view text) {
  if (text == "adam") return OptimizerKind::Adam;
  if (text == "lbfgs") return OptimizerKind::Lbfgs;
  throw ConfigError("unknown optimizer \"" + std::string(text) + "\" (adam|lbfgs)");
}

void InversionConfig::validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw ConfigError("inversion: alpha must be finite and non-negative");
  }
  if (max_iters <= 0) {
    throw ConfigError("inversion: max_iters must be positive");
  }
  if (!(step_size > 0.0)) {
    throw ConfigError("inversion: step size must be positive");
  }
  if (!(tolerance >= 0.0)) {
    throw ConfigError("inversion: tolerance must be non-negative");
  }
}

std::string InversionConfig::hash() const {
  std::ostringstream canon;
  canon.precision(17);
  canon << "alpha=" << alpha << ";iters=" << max_iters << ";step=" << step_size << ";opt=" << to_string(optimizer)
        << ";tol=" << tolerance << ";seed=" << seed;
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canon.str()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

VectorXc PreImage::tone_vector(int tone) const {
  const auto cells = static_cast<Eigen::Index>(n) * n;
  VectorXc v(cells);
  for (Eigen::Index i = 0; i < cells; ++i) {
    v[i] = data[static_cast<std::size_t>(tone) * static_cast<std::size_t>(cells) + static_cast<std::size_t>(i)];
  }
  return v;
}

PreImage pre_identify(const std::vector<Eigen::MatrixXd>& amplitudes, const OperatorSet& ops,
                      const InversionConfig& config, std::optional<std::vector<std::uint8_t>> indicator) {
  config.validate();
  if (amplitudes.size() != ops.tones.size()) {
    throw ConfigError("pre_identify: one amplitude matrix per tone is required");
  }
  PreImage img;
  img.n_tone = static_cast<int>(ops.tones.size());
  img.n = ops.domain.n;
  img.config_hash = config.hash();
  const auto cells = static_cast<std::size_t>(ops.domain.cell_count());
  img.data.assign(static_cast<std::size_t>(img.n_tone) * cells, cplx{});
  img.objective_history.resize(ops.tones.size());
  const std::optional<std::vector<std::uint8_t>> ind = config.alpha > 0.0 ? indicator : std::nullopt;

  parallel_for(ops.tones.size(), [&](std::size_t t) {
    const PhaselessProblem problem(ops.tones[t], amplitudes[t].cwiseAbs2(), config.alpha, ind);
    const auto n = static_cast<Eigen::Index>(cells);
    const Objective fn = [&](const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
      VectorXc chi(n);
      chi.real() = x.head(n);
      chi.imag() = x.tail(n);
      VectorXc g;
      const double v = problem.objective_and_gradient(chi, grad != nullptr ? &g : nullptr);
      if (grad != nullptr) {
        grad->resize(2 * n);
        grad->head(n) = g.real();
        grad->tail(n) = g.imag();
      }
      return v;
    };
    const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(2 * n);
    OptimizeResult res;
    try {
      if (config.optimizer == OptimizerKind::Adam) {
        AdamOptions o;
        o.learning_rate = config.step_size;
        o.max_iterations = config.max_iters;
        o.tolerance = config.tolerance;
        o.gradient_tolerance = kStationaryGradient;
        res = adam(fn, x0, o);
      } else {
        LbfgsOptions o;
        o.max_iterations = config.max_iters;
        o.tolerance = config.tolerance;
        o.gradient_tolerance = kStationaryGradient;
        res = lbfgs(fn, x0, o);
      }
    } catch (const NumericError& e) {
      throw NumericError("pre_identify tone " + std::to_string(t) + ": " + e.what());
    }
    for (std::size_t i = 0; i < cells; ++i) {
      img.data[t * cells + i] = {res.x[static_cast<Eigen::Index>(i)], res.x[n + static_cast<Eigen::Index>(i)]};
    }
    img.objective_history[t] = std::move(res.history);
  });
  return img;
}

PreImage pre_identify(const MeasurementSet& measurements, const GainTable& gains, const OperatorSet& ops,
                      const InversionConfig& config, std::optional<std::vector<std::uint8_t>> indicator,
                      const PreprocessOptions& preprocess) {
  if (measurements.tx_count != ops.tx_count() || measurements.rx_count != ops.rx_count() ||
      measurements.tone_count != ops.tones.size()) {
    throw ConfigError("pre_identify: measurements do not match the operator set");
  }
  PreImage img = pre_identify(normalize_total_field(measurements, gains, preprocess), ops, config, std::move(indicator));
  img.measurement_id = measurements.scene_id;
  return img;
}

std::vector<std::uint8_t> target_indicator(const LabelGrid& labels) {
  std::vector<std::uint8_t> out(labels.labels.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = labels.labels[i] != 0 ? 1 : 0;
  }
  return out;
}

}  // namespace wifield
