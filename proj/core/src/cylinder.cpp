#include "wifield/cylinder.hpp"

#include <chrono>
#include <cmath>
#include <numbers>

#include "wifield/error.hpp"
#include "wifield/specfun.hpp"

namespace wifield {

namespace {

struct Polar {
  double rho;
  double phi;
};

Polar polar(Point2 p, Point2 c) { return {distance(p, c), std::atan2(p.y - c.y, p.x - c.x)}; }

std::vector<cplx> hankel2_sequence(int max_order, double x) {
  const std::vector<double> j = specfun::bessel_j_sequence(max_order, x);
  const std::vector<double> y = specfun::bessel_y_sequence(max_order, x);
  std::vector<cplx> h(j.size());
  for (std::size_t n = 0; n < j.size(); ++n) {
    h[n] = {j[n], -y[n]};
  }
  return h;
}

template <typename T>
T derivative(const std::vector<T>& f, std::size_t n, double x) {
  if (n == 0) {
    return -f[1];
  }
  return f[n - 1] - (static_cast<double>(n) / x) * f[n];
}

}  // namespace

VectorXc cylinder_oracle(double radius, double eps_r, double k0, Point2 source, const std::vector<Point2>& rx,
                         const CylinderOracleOptions& options) {
  if (!(radius > 0.0) || !(eps_r > 0.0) || !(k0 > 0.0)) {
    throw ConfigError("cylinder_oracle: radius, eps_r and k0 must be positive");
  }
  const Polar src = polar(source, options.center);
  if (src.rho <= radius) {
    throw ConfigError("cylinder_oracle: source inside the cylinder");
  }
  std::vector<Polar> obs;
  for (Point2 p : rx) {
    obs.push_back(polar(p, options.center));
    if (obs.back().rho <= radius) {
      throw ConfigError("cylinder_oracle: receiver inside the cylinder");
    }
  }
  VectorXc out = VectorXc::Zero(static_cast<Eigen::Index>(rx.size()));
  if (eps_r == 1.0) {
    return out;
  }

  const int top = options.max_terms + 1;  // one extra order for derivatives
  const double k1 = k0 * std::sqrt(eps_r);
  const double x0 = k0 * radius;
  const double x1 = k1 * radius;
  const std::vector<double> j_out = specfun::bessel_j_sequence(top, x0);
  const std::vector<double> j_in = specfun::bessel_j_sequence(top, x1);
  const std::vector<cplx> h_a = hankel2_sequence(top, x0);
  const std::vector<cplx> h_src = hankel2_sequence(top, k0 * src.rho);
  std::vector<std::vector<cplx>> h_obs;
  for (const Polar& o : obs) {
    h_obs.push_back(hankel2_sequence(top, k0 * o.rho));
  }

  const cplx prefactor = options.amplitude * cplx{0.0, -0.25};
  for (int n = 0; n <= options.max_terms; ++n) {
    const auto nu = static_cast<std::size_t>(n);
    const double dj_out = derivative(j_out, nu, x0);
    const double dj_in = derivative(j_in, nu, x1);
    const cplx dh_a = derivative(h_a, nu, x0);
    const cplx num = k1 * dj_in * j_out[nu] - k0 * dj_out * j_in[nu];
    const cplx den = k0 * dh_a * j_in[nu] - k1 * dj_in * h_a[nu];
    const cplx c_n = num / den;
    const double weight = n == 0 ? 1.0 : 2.0;

    bool converged = n > 0;
    for (std::size_t q = 0; q < obs.size(); ++q) {
      const cplx term = prefactor * weight * c_n * h_src[nu] * h_obs[q][nu] *
                        std::cos(n * (obs[q].phi - src.phi));
      if (!std::isfinite(term.real()) || !std::isfinite(term.imag())) {
        throw NumericError("cylinder_oracle: series overflowed before converging");
      }
      out[static_cast<Eigen::Index>(q)] += term;
      // The cosine can vanish for a single order, so judge size by the unweighted magnitude.
      const double mag = std::abs(prefactor * weight * c_n * h_src[nu] * h_obs[q][nu]);
      if (mag > options.term_tolerance * std::abs(out[static_cast<Eigen::Index>(q)])) {
        converged = false;
      }
    }
    if (converged) {
      return out;
    }
  }
  throw NumericError("cylinder_oracle: series did not converge within " +
                     std::to_string(options.max_terms) + " terms");
}

CylinderComparison compare_cylinder(const CylinderCase& c) {
  if (!(c.freq_hz > 0.0) || !(c.radius > 0.0) || !(c.eps_r >= 1.0) || c.n < 2 || c.rx_count < 1 ||
      !(c.ring_radius > c.radius) || !(c.source_distance > c.radius)) {
    throw ConfigError("cylinder case: invalid geometry or material");
  }
  const double lambda = wavelength(c.freq_hz);
  const double k0 = wavenumber(c.freq_hz);
  const double a = c.radius * lambda;

  const SensingDomain domain{{-a, -a}, 2.0 * a, c.n};
  ArrayLayout array;
  array.tx = {{-c.source_distance * lambda, 0.0}};
  for (int q = 0; q < c.rx_count; ++q) {
    const double t = 2.0 * std::numbers::pi * q / c.rx_count;
    array.rx.push_back({c.ring_radius * lambda * std::cos(t), c.ring_radius * lambda * std::sin(t)});
  }
  array.tones_hz = {c.freq_hz};
  const AntennaModel antenna{IncidentMode::Line2d, {1.0, 0.0}};

  CylinderComparison out;
  out.rx = array.rx;
  const auto t0 = std::chrono::steady_clock::now();
  const OperatorSet ops = build_operators(domain, array, antenna);
  VectorXc chi = VectorXc::Zero(domain.cell_count());
  for (int i = 0; i < domain.cell_count(); ++i) {
    const Point2 p = domain.cell_center(i);
    if (std::hypot(p.x, p.y) <= a) {
      chi[i] = c.eps_r - 1.0;
    }
  }
  const FieldSet fields = mimo_sweep(chi, ops, c.solver);
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  out.mom = fields.tones[0].e_s_rx.row(0).transpose();
  out.oracle = cylinder_oracle(a, c.eps_r, k0, array.tx[0], array.rx);
  out.rel_err = (out.mom - out.oracle).norm() / out.oracle.norm();
  out.residual = total_field_residual(chi, fields.tones[0].e_t_cells.row(0).transpose(),
                                      ops.tones[0].ei_cells.row(0).transpose(), domain, ops.tones[0].gs);
  return out;
}

}  // namespace wifield
