#include "wifield/forward.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/LU>

#include "json_util.hpp"
#include "wifield/error.hpp"
#include "wifield/parallel.hpp"
#include "wifield/toeplitz.hpp"

namespace wifield {

using detail::json;

namespace {

constexpr double kResidualTarget = 1e-10;
constexpr double kSingularRcond = 1e-13;
// Above this many G_S entries the exterior field is formed by FFT instead of a dense block.
constexpr double kDenseExteriorLimit = 4e6;

std::vector<int> support_of(const VectorXc& chi) {
  std::vector<int> s;
  for (Eigen::Index i = 0; i < chi.size(); ++i) {
    if (chi[i] != cplx{0.0, 0.0}) {
      s.push_back(static_cast<int>(i));
    }
  }
  return s;
}

void check_chi(const VectorXc& chi, const SensingDomain& domain) {
  if (chi.size() != domain.cell_count()) {
    throw ConfigError("contrast length " + std::to_string(chi.size()) + " does not match the " +
                      std::to_string(domain.cell_count()) + "-cell domain");
  }
  if (!chi.allFinite()) {
    throw ConfigError("contrast contains non-finite entries");
  }
}

GridWindow full_window(const SensingDomain& domain) { return {0, 0, domain.n, domain.n}; }

// Scatters values on support cells into a window-shaped vector.
VectorXc to_window(const VectorXc& values, const std::vector<int>& support, const GridWindow& w, int n) {
  VectorXc out = VectorXc::Zero(w.size());
  for (std::size_t k = 0; k < support.size(); ++k) {
    const int row = support[k] / n - w.row0;
    const int col = support[k] % n - w.col0;
    out[row * w.cols + col] = values[static_cast<Eigen::Index>(k)];
  }
  return out;
}

VectorXc from_window(const VectorXc& values, const std::vector<int>& support, const GridWindow& w, int n) {
  VectorXc out(static_cast<Eigen::Index>(support.size()));
  for (std::size_t k = 0; k < support.size(); ++k) {
    const int row = support[k] / n - w.row0;
    const int col = support[k] % n - w.col0;
    out[static_cast<Eigen::Index>(k)] = values[row * w.cols + col];
  }
  return out;
}

}  // namespace

std::string to_string(SolverMethod method) {
  switch (method) {
    case SolverMethod::Auto: return "auto";
    case SolverMethod::Dense: return "dense";
    case SolverMethod::Iterative: return "iterative";
  }
  return "auto";
}

SolverMethod parse_solver_method(std::string_view text) {
  if (text == "auto") return SolverMethod::Auto;
  if (text == "dense") return SolverMethod::Dense;
  if (text == "iterative") return SolverMethod::Iterative;
  throw ConfigError("unknown solver \"" + std::string(text) + "\" (auto|dense|iterative)");
}

MatrixXc solve_total_fields(const VectorXc& chi, const SensingDomain& domain, const ToneOperators& op,
                            const SolverOptions& options) {
  check_chi(chi, domain);
  const int n = domain.n;
  const auto cells = static_cast<Eigen::Index>(domain.cell_count());
  const auto p_count = op.ei_cells.rows();
  if (op.ei_cells.cols() != cells || op.gs.n() != n) {
    throw ConfigError("operators were built for a different domain");
  }
  MatrixXc e_t = op.ei_cells;
  const std::vector<int> support = support_of(chi);
  if (support.empty()) {
    return e_t;
  }
  const auto s_count = static_cast<Eigen::Index>(support.size());
  VectorXc chi_s(s_count);
  for (Eigen::Index k = 0; k < s_count; ++k) {
    chi_s[k] = chi[support[static_cast<std::size_t>(k)]];
  }
  MatrixXc rhs(s_count, p_count);  // incident field on the support, one column per tx
  for (Eigen::Index k = 0; k < s_count; ++k) {
    rhs.row(k) = op.ei_cells.col(support[static_cast<std::size_t>(k)]).transpose();
  }

  const bool dense = options.method == SolverMethod::Dense ||
                     (options.method == SolverMethod::Auto && s_count <= options.dense_limit);
  const GridWindow window = bounding_window(support, n);
  MatrixXc e_s(s_count, p_count);
  if (dense) {
    MatrixXc a = -op.gs.block(support, support);
    a = a * chi_s.asDiagonal();
    a.diagonal().array() += 1.0;
    const Eigen::PartialPivLU<MatrixXc> lu(a);
    const double rcond = lu.rcond();
    if (!(rcond > kSingularRcond)) {
      std::ostringstream msg;
      msg << "total-field system is singular (condition estimate " << (rcond > 0.0 ? 1.0 / rcond : INFINITY)
          << "); the contrast is nonphysical";
      throw NumericError(msg.str());
    }
    e_s = lu.solve(rhs);
    // One step of iterative refinement keeps the residual at the 1e-10 target for
    // moderately conditioned systems.
    MatrixXc r = rhs - a * e_s;
    e_s += lu.solve(r);
    r = rhs - a * e_s;
    for (Eigen::Index p = 0; p < p_count; ++p) {
      if (r.col(p).norm() > kResidualTarget * rhs.col(p).norm()) {
        throw NumericError("dense total-field solve missed the residual target (condition estimate " +
                           std::to_string(1.0 / rcond) + ")");
      }
    }
  } else {
    const ToeplitzConvolver conv(op.gs, window, window);
    VectorXc win_in;
    VectorXc win_out;
    const LinearOperator apply = [&](const VectorXc& x, VectorXc& y) {
      win_in = to_window(chi_s.cwiseProduct(x), support, window, n);
      conv.apply(win_in, win_out);
      y = x - from_window(win_out, support, window, n);
    };
    for (Eigen::Index p = 0; p < p_count; ++p) {
      const GmresResult g = gmres(apply, rhs.col(p), options.gmres);
      if (!g.converged) {
        throw NumericError("GMRES stopped after " + std::to_string(g.iterations) +
                           " iterations at relative residual " + std::to_string(g.relative_residual));
      }
      e_s.col(p) = g.x;
    }
  }

  // Exterior cells: E_t = E_i + G_S[:, S] (chi_S o E_S); support rows are overwritten by the solve.
  MatrixXc j_s = chi_s.asDiagonal() * e_s;
  const double exterior_entries = static_cast<double>(cells) * static_cast<double>(s_count);
  if (exterior_entries <= kDenseExteriorLimit) {
    std::vector<int> all(static_cast<std::size_t>(cells));
    for (int i = 0; i < static_cast<int>(cells); ++i) {
      all[static_cast<std::size_t>(i)] = i;
    }
    e_t.noalias() += (op.gs.block(all, support) * j_s).transpose();
  } else {
    const ToeplitzConvolver conv(op.gs, window, full_window(domain));
    VectorXc out;
    for (Eigen::Index p = 0; p < p_count; ++p) {
      conv.apply(to_window(j_s.col(p), support, window, n), out);
      e_t.row(p) += out.transpose();
    }
  }
  for (Eigen::Index k = 0; k < s_count; ++k) {
    e_t.col(support[static_cast<std::size_t>(k)]) = e_s.row(k).transpose();
  }
  return e_t;
}

VectorXc solve_total_field(const VectorXc& chi, const OperatorSet& ops, std::size_t tx, std::size_t tone,
                           const SolverOptions& options) {
  if (tone >= ops.tones.size() || tx >= ops.tx_count()) {
    throw ConfigError("transmitter or tone index out of range");
  }
  ToneOperators single = ops.tones[tone];
  single.ei_cells = ops.tones[tone].ei_cells.row(static_cast<Eigen::Index>(tx));
  return solve_total_fields(chi, ops.domain, single, options).row(0).transpose();
}

VectorXc scattered_at_rx(const VectorXc& chi, const VectorXc& e_t, const MatrixXc& go) {
  if (chi.size() != go.cols() || e_t.size() != go.cols()) {
    throw ConfigError("scattered_at_rx: size mismatch");
  }
  return go * chi.cwiseProduct(e_t);
}

VectorXc scattered_at_rx(const VectorXc& chi, const VectorXc& e_t, const OperatorSet& ops, std::size_t tone) {
  return scattered_at_rx(chi, e_t, ops.tones.at(tone).go);
}

VectorXc born_scattered(const VectorXc& chi, const OperatorSet& ops, std::size_t tx, std::size_t tone) {
  const ToneOperators& op = ops.tones.at(tone);
  return scattered_at_rx(chi, op.ei_cells.row(static_cast<Eigen::Index>(tx)).transpose(), op.go);
}

double total_field_residual(const VectorXc& chi, const VectorXc& e_t, const VectorXc& e_i,
                            const SensingDomain& domain, const GreenTable& gs) {
  const GridWindow w = full_window(domain);
  const ToeplitzConvolver conv(gs, w, w);
  VectorXc g;
  conv.apply(chi.cwiseProduct(e_t), g);
  return (e_t - e_i - g).norm() / e_i.norm();
}

FieldSet mimo_sweep(const VectorXc& chi, const OperatorSet& ops, const SolverOptions& options) {
  check_chi(chi, ops.domain);
  FieldSet fields{ops.array.tones_hz, std::vector<ToneFields>(ops.tones.size())};
  parallel_for(ops.tones.size(), [&](std::size_t t) {
    const ToneOperators& op = ops.tones[t];
    ToneFields& tf = fields.tones[t];
    tf.e_t_cells = solve_total_fields(chi, ops.domain, op, options);
    tf.j_cells = tf.e_t_cells * chi.asDiagonal();
    tf.e_i_rx = op.ei_rx;
    tf.e_s_rx = tf.j_cells * op.go.transpose();
    tf.e_total_rx = tf.e_i_rx + tf.e_s_rx;
  });
  return fields;
}

FieldSet mimo_sweep(const Scene& scene, const ArrayLayout& array, const AntennaModel& antenna,
                    const SolverOptions& options) {
  const auto grids = rasterize(scene);
  const OperatorSet ops = build_operators(scene.domain, array, antenna);
  return mimo_sweep(grids.first.chi, ops, options);
}

namespace {

json matrix_rows_to_json(const MatrixXc& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      row.push_back(detail::complex_to_json(m(i, j)));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

MatrixXc matrix_rows_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) {
    throw ConfigError(std::string(what) + ": expected a non-empty array of rows");
  }
  MatrixXc m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(j[0].size()));
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != j[0].size()) {
      throw ConfigError(std::string(what) + ": ragged rows");
    }
    for (std::size_t c = 0; c < j[r].size(); ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = detail::complex_from_json(j[r][c], what);
    }
  }
  return m;
}

}  // namespace

std::string fields_to_json(const FieldSet& fields, bool full) {
  json doc;
  doc["tones_hz"] = fields.tones_hz;
  json inc = json::array(), sca = json::array(), tot = json::array();
  json cells = json::array(), currents = json::array();
  for (const ToneFields& tf : fields.tones) {
    inc.push_back(matrix_rows_to_json(tf.e_i_rx));
    sca.push_back(matrix_rows_to_json(tf.e_s_rx));
    tot.push_back(matrix_rows_to_json(tf.e_total_rx));
    if (full) {
      cells.push_back(matrix_rows_to_json(tf.e_t_cells));
      currents.push_back(matrix_rows_to_json(tf.j_cells));
    }
  }
  doc["e_incident"] = std::move(inc);
  doc["e_scattered"] = std::move(sca);
  doc["e_total"] = std::move(tot);
  if (full) {
    doc["e_t_cells"] = std::move(cells);
    doc["j_cells"] = std::move(currents);
  }
  return doc.dump();
}

FieldSet parse_fields(std::string_view json_text) {
  const json doc = detail::parse_json(json_text, "fields");
  FieldSet fs;
  fs.tones_hz = detail::require<std::vector<double>>(doc, "tones_hz", "fields");
  const json& inc = detail::member(doc, "e_incident", "fields");
  const json& sca = detail::member(doc, "e_scattered", "fields");
  const json& tot = detail::member(doc, "e_total", "fields");
  if (inc.size() != fs.tones_hz.size() || sca.size() != fs.tones_hz.size() || tot.size() != fs.tones_hz.size()) {
    throw ConfigError("fields: tone count mismatch");
  }
  for (std::size_t t = 0; t < fs.tones_hz.size(); ++t) {
    ToneFields tf;
    tf.e_i_rx = matrix_rows_from_json(inc[t], "fields.e_incident");
    tf.e_s_rx = matrix_rows_from_json(sca[t], "fields.e_scattered");
    tf.e_total_rx = matrix_rows_from_json(tot[t], "fields.e_total");
    if (doc.contains("e_t_cells")) {
      tf.e_t_cells = matrix_rows_from_json(doc["e_t_cells"].at(t), "fields.e_t_cells");
      tf.j_cells = matrix_rows_from_json(doc.at("j_cells").at(t), "fields.j_cells");
    }
    fs.tones.push_back(std::move(tf));
  }
  return fs;
}

}  // namespace wifield
