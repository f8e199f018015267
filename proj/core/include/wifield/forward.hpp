#pragma once

// Total-field solve (I - G_S diag(chi)) E_t = E_i and receiver fields.

#include <string>
#include <string_view>
#include <vector>

#include "wifield/greens.hpp"
#include "wifield/krylov.hpp"
#include "wifield/scene.hpp"

namespace wifield {

enum class SolverMethod { Auto, Dense, Iterative };

std::string to_string(SolverMethod method);
SolverMethod parse_solver_method(std::string_view text);

struct SolverOptions {
  SolverMethod method = SolverMethod::Auto;
  // Auto switches to GMRES once the contrast support holds more cells than this.
  int dense_limit = 2500;
  GmresOptions gmres{};
};

/// E_t for every transmitter of one tone, as a P x N^2 matrix. The system is reduced to
/// the cells where chi != 0; one factorization serves all transmitters.
MatrixXc solve_total_fields(const VectorXc& chi, const SensingDomain& domain,
                            const ToneOperators& op, const SolverOptions& options = {});

VectorXc solve_total_field(const VectorXc& chi, const OperatorSet& ops, std::size_t tx,
                           std::size_t tone, const SolverOptions& options = {});

/// E_s = G_O (chi o E_t).
VectorXc scattered_at_rx(const VectorXc& chi, const VectorXc& e_t, const MatrixXc& go);
VectorXc scattered_at_rx(const VectorXc& chi, const VectorXc& e_t, const OperatorSet& ops,
                         std::size_t tone);

/// Born prediction G_O (chi o E_i) for transmitter p.
VectorXc born_scattered(const VectorXc& chi, const OperatorSet& ops, std::size_t tx, std::size_t tone);

/// Relative residual ||E_t - E_i - G_S (chi o E_t)|| / ||E_i|| with G_S applied by FFT.
double total_field_residual(const VectorXc& chi, const VectorXc& e_t, const VectorXc& e_i,
                            const SensingDomain& domain, const GreenTable& gs);

struct ToneFields {
  MatrixXc e_t_cells;  // P x N^2
  MatrixXc j_cells;    // P x N^2, chi o E_t
  MatrixXc e_i_rx;     // P x Q
  MatrixXc e_s_rx;     // P x Q
  MatrixXc e_total_rx; // P x Q, e_i_rx + e_s_rx
};

struct FieldSet {
  std::vector<double> tones_hz;
  std::vector<ToneFields> tones;
};

FieldSet mimo_sweep(const VectorXc& chi, const OperatorSet& ops, const SolverOptions& options = {});
FieldSet mimo_sweep(const Scene& scene, const ArrayLayout& array, const AntennaModel& antenna,
                    const SolverOptions& options = {});

/// Fields JSON: {"tones_hz":[...],"e_incident"|"e_scattered"|"e_total": [tone][tx][rx] of [re,im]};
/// with `full`, also "e_t_cells" and "j_cells" as [tone][tx][cell].
std::string fields_to_json(const FieldSet& fields, bool full = false);
FieldSet parse_fields(std::string_view json_text);

}  // namespace wifield
