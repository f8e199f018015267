#pragma once

// Born inversion of complex scattered fields and phaseless pre-identification.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wifield/greens.hpp"
#include "wifield/measure.hpp"
#include "wifield/optimize.hpp"
#include "wifield/scene.hpp"

namespace wifield {

/// B = [G_O diag(E_i^1); ...; G_O diag(E_i^P)], the (P*Q) x N^2 Born operator of one tone.
MatrixXc born_operator(const ToneOperators& op);

/// Minimizes sum_p ||G_O diag(E_i^p) chi - E_s^p||^2 + alpha ||chi||^2 for one tone.
/// `e_s` is P x Q. With alpha = 0 a singular Gram matrix raises NumericError.
ContrastGrid born_invert(const MatrixXc& e_s, const OperatorSet& ops, std::size_t tone, double alpha);

/// mean over cells of BCE(f_n(|chi|), labels) with f_n(x) = (x - min) / (max - min + 1e-12)
/// and probabilities clamped to [1e-12, 1 - 1e-12].
double bce_regularizer(const VectorXc& chi, const std::vector<std::uint8_t>& indicator);

/// Gradient of bce_regularizer as d/dRe + j d/dIm, holding the min-max scale fixed.
/// Zero while the spread of |chi| is below 5% of its maximum, where the scale is degenerate.
VectorXc bce_gradient(const VectorXc& chi, const std::vector<std::uint8_t>& indicator);

/// Phaseless objective of one tone:
///   sum_p ||A^p / mean(A^p) - M^p / mean(M^p)||^2 + alpha * BCE,
/// with A^p = |G_O (chi o E_i^p) + E_inc^p|^2 and M the measured squared amplitudes.
class PhaselessProblem {
public:
  /// `measured_sq` is P x Q. `indicator` enables the BCE term (dataset generation only).
  PhaselessProblem(const ToneOperators& op, Eigen::MatrixXd measured_sq, double alpha,
                   std::optional<std::vector<std::uint8_t>> indicator = std::nullopt);

  double objective(const VectorXc& chi) const;
  /// Objective plus the gradient as d/dRe chi + j d/dIm chi.
  double objective_and_gradient(const VectorXc& chi, VectorXc* grad) const;

  std::size_t cell_count() const { return static_cast<std::size_t>(b_.cols()); }

private:
  MatrixXc b_;        // (P*Q) x N^2
  VectorXc e_inc_;    // P*Q, incident field at receivers
  Eigen::VectorXd m_; // P*Q, normalized measurements M^p / mean(M^p)
  std::size_t tx_ = 0;
  std::size_t rx_ = 0;
  double alpha_ = 0.0;
  std::optional<std::vector<std::uint8_t>> indicator_;
};

double phaseless_objective(const VectorXc& chi, const Eigen::MatrixXd& measured_sq, const ToneOperators& op,
                           double alpha, const std::vector<std::uint8_t>* indicator = nullptr);

/// Real gradient of length 2 N^2: derivatives with respect to Re chi, then Im chi.
Eigen::VectorXd phaseless_gradient(const VectorXc& chi, const Eigen::MatrixXd& measured_sq,
                                   const ToneOperators& op, double alpha,
                                   const std::vector<std::uint8_t>* indicator = nullptr);

enum class OptimizerKind { Adam, Lbfgs };

std::string to_string(OptimizerKind kind);
OptimizerKind parse_optimizer(std::string_view text);

struct InversionConfig {
  double alpha = 0.0;
  int max_iters = 500;
  double step_size = 1e-2;
  OptimizerKind optimizer = OptimizerKind::Adam;
  double tolerance = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
  std::string hash() const;
};

struct PreImage {
  int n_tone = 0;
  int n = 0;
  std::vector<cplx> data;  // (tone, row, col) row-major
  std::string config_hash;
  std::string measurement_id;
  std::vector<std::vector<double>> objective_history;  // per tone

  cplx& at(int tone, int row, int col) {
    return data[(static_cast<std::size_t>(tone) * n + row) * n + col];
  }
  cplx at(int tone, int row, int col) const {
    return data[(static_cast<std::size_t>(tone) * n + row) * n + col];
  }
  VectorXc tone_vector(int tone) const;
};

/// Independently per tone, runs the configured optimizer from chi = 0 on the squared
/// normalized amplitudes (`amplitudes[t]` is P x Q). Throws NumericError on divergence.
PreImage pre_identify(const std::vector<Eigen::MatrixXd>& amplitudes, const OperatorSet& ops,
                      const InversionConfig& config,
                      std::optional<std::vector<std::uint8_t>> indicator = std::nullopt);

/// Preprocesses raw measurements with the gain table, then runs pre_identify.
PreImage pre_identify(const MeasurementSet& measurements, const GainTable& gains, const OperatorSet& ops,
                      const InversionConfig& config,
                      std::optional<std::vector<std::uint8_t>> indicator = std::nullopt,
                      const PreprocessOptions& preprocess = {});

/// Binary target indicator (label != 0) of a label grid.
std::vector<std::uint8_t> target_indicator(const LabelGrid& labels);

}  // namespace wifield
