#pragma once

// Discretized scattering operators and incident fields.
// Time convention e^{+jwt}; 2D kernel g(R) = -(j/4) H0^(2)(k0 R).

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "wifield/scene.hpp"
#include "wifield/types.hpp"

namespace wifield {

enum class IncidentMode { Antenna3d, Line2d };

std::string to_string(IncidentMode mode);
IncidentMode parse_incident_mode(std::string_view text);

struct AntennaModel {
  IncidentMode mode = IncidentMode::Antenna3d;
  cplx amplitude{1.0, 0.0};  // C

  void validate() const;
};

struct ArrayLayout {
  std::vector<Point2> tx;
  std::vector<Point2> rx;
  std::vector<double> tones_hz;

  /// P, Q >= 1, finite strictly increasing tones, antennas outside the domain.
  void validate(const SensingDomain& domain) const;
};

// Array JSON: {"tx":[[x,y]...],"rx":[[x,y]...],"tones_hz":[...]}
ArrayLayout parse_array(std::string_view json_text);
std::string array_to_json(const ArrayLayout& array);
ArrayLayout load_array(const std::filesystem::path& path);
void save_array(const ArrayLayout& array, const std::filesystem::path& path);

/// g(R) = -(j/4) H0^(2)(k0 R).
cplx green2d(double k0, double r);

/// Equal-area-circle integral of k0^2 g over one square cell of side `cell_size`.
cplx self_term(double k0, double cell_size);

/// Field of a unit source at `source` evaluated at each point.
VectorXc incident_field(const AntennaModel& model, Point2 source, const std::vector<Point2>& points,
                        double k0);

/// Entries of G_S as a function of the cell offset (|drow|, |dcol|). On a uniform
/// grid this captures the whole N^2 x N^2 matrix in N^2 numbers.
class GreenTable {
public:
  GreenTable() = default;
  GreenTable(const SensingDomain& domain, double k0);

  int n() const { return n_; }
  double k0() const { return k0_; }
  cplx at_offset(int drow, int dcol) const {
    return table_[static_cast<std::size_t>(std::abs(drow)) * static_cast<std::size_t>(n_) +
                  static_cast<std::size_t>(std::abs(dcol))];
  }
  cplx operator()(int m, int k) const { return at_offset(m / n_ - k / n_, m % n_ - k % n_); }

  /// Dense G_S restricted to the given rows and columns.
  MatrixXc block(const std::vector<int>& rows, const std::vector<int>& cols) const;
  MatrixXc dense() const;

private:
  int n_ = 0;
  double k0_ = 0.0;
  std::vector<cplx> table_;
};

MatrixXc assemble_gs(const SensingDomain& domain, double k0);

/// Throws ConfigError when a receiver lies inside the domain.
MatrixXc assemble_go(const SensingDomain& domain, const std::vector<Point2>& rx, double k0);

struct ToneOperators {
  double freq_hz = 0.0;
  double k0 = 0.0;
  GreenTable gs;
  MatrixXc go;        // Q x N^2
  MatrixXc ei_cells;  // P x N^2
  MatrixXc ei_rx;     // P x Q
};

struct OperatorSet {
  SensingDomain domain;
  ArrayLayout array;
  AntennaModel antenna;
  std::vector<ToneOperators> tones;

  std::size_t tx_count() const { return array.tx.size(); }
  std::size_t rx_count() const { return array.rx.size(); }
};

std::vector<Point2> cell_centers(const SensingDomain& domain);

/// Builds operators for every tone of the array. Tones are assembled in parallel.
OperatorSet build_operators(const SensingDomain& domain, const ArrayLayout& array,
                            const AntennaModel& antenna);

/// True when the cell size exceeds a quarter wavelength at the highest tone.
bool grid_too_coarse(const SensingDomain& domain, double k0);

}  // namespace wifield
