//
// pcm-forge - Copyright 2026 The pcm-forge Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "pcmforge/plant.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "pcmforge/errors.hpp"

namespace pcmforge::plant {
namespace {
  constexpr int kDim = 5;
  using Mat5 = std::array<std::array<double, kDim>, kDim>;
  using Vec5 = std::array<double, kDim>;

  enum Unknown : int { kJ1 = 0, kCd, kHx, kJ2, kCpcm };

  /// Spacing of the doubles in the binade of x (x > 0).
  double ulp_of(double x) {
    int e = 0;
    std::frexp(x, &e);
    return std::ldexp(1.0, e - std::numeric_limits<double>::digits);
  }

  void require_positive(double value, const char *name) {
    if (!(value > 0.0) || !std::isfinite(value)) {
      std::ostringstream os;
      os << name << " must be positive and finite (got " << value << ")";
      throw DomainError(os.str());
    }
  }

  // Row-equilibrated LU with partial pivoting. Small and dense on purpose:
  // the coolant network always has exactly five unknowns.
  class Lu5 {
  public:
    explicit Lu5(const Mat5 &a) : lu_(a) {
      for (int i = 0; i < kDim; ++i)
        perm_[i] = i;

      for (int k = 0; k < kDim; ++k) {
        int p = k;
        for (int i = k + 1; i < kDim; ++i) {
          if (std::abs(lu_[i][k]) > std::abs(lu_[p][k]))
            p = i;
        }
        if (std::abs(lu_[p][k]) <= kPivotTol) {
          singular_ = true;
          return;
        }
        if (p != k) {
          std::swap(lu_[p], lu_[k]);
          std::swap(perm_[p], perm_[k]);
        }
        for (int i = k + 1; i < kDim; ++i) {
          const double f = lu_[i][k] / lu_[k][k];
          lu_[i][k] = f;
          for (int j = k + 1; j < kDim; ++j)
            lu_[i][j] -= f * lu_[k][j];
        }
      }
    }

    bool singular() const { return singular_; }

    Vec5 solve(const Vec5 &b) const {
      Vec5 y{};
      for (int i = 0; i < kDim; ++i) {
        double s = b[perm_[i]];
        for (int j = 0; j < i; ++j)
          s -= lu_[i][j] * y[j];
        y[i] = s;
      }
      Vec5 x{};
      for (int i = kDim - 1; i >= 0; --i) {
        double s = y[i];
        for (int j = i + 1; j < kDim; ++j)
          s -= lu_[i][j] * x[j];
        x[i] = s / lu_[i][i];
      }
      return x;
    }

    // Solves A^T x = b with P A = L U  =>  A^T = U^T L^T P.
    Vec5 solve_transposed(const Vec5 &b) const {
      Vec5 z{};
      for (int i = 0; i < kDim; ++i) {
        double s = b[i];
        for (int j = 0; j < i; ++j)
          s -= lu_[j][i] * z[j];
        z[i] = s / lu_[i][i];
      }
      Vec5 w{};
      for (int i = kDim - 1; i >= 0; --i) {
        double s = z[i];
        for (int j = i + 1; j < kDim; ++j)
          s -= lu_[j][i] * w[j];
        w[i] = s;
      }
      Vec5 x{};
      for (int i = 0; i < kDim; ++i)
        x[perm_[i]] = w[i];
      return x;
    }

  private:
    static constexpr double kPivotTol = 1e-13;

    Mat5 lu_;
    std::array<int, kDim> perm_{};
    bool singular_ = false;
  };

  double norm1(const Mat5 &a) {
    double best = 0.0;
    for (int j = 0; j < kDim; ++j) {
      double s = 0.0;
      for (int i = 0; i < kDim; ++i)
        s += std::abs(a[i][j]);
      best = std::max(best, s);
    }
    return best;
  }

  // kappa_1 via the explicit inverse; only used for diagnostics.
  double condition_estimate(const Mat5 &a, const Lu5 &lu) {
    if (lu.singular())
      return std::numeric_limits<double>::infinity();
    Mat5 inv{};
    for (int j = 0; j < kDim; ++j) {
      Vec5 e{};
      e[j] = 1.0;
      const Vec5 col = lu.solve(e);
      for (int i = 0; i < kDim; ++i)
        inv[i][j] = col[i];
    }
    return norm1(a) * norm1(inv);
  }

  struct LinearSystem {
    Mat5 a{};
    Vec5 b{};
    Vec5 row_scale{};
    bool hx_bypassed = false;
    bool pcm_bypassed = false;
  };

  // Assembles the five coolant balances in the unknown order
  // (T_c_j1, T_c_d, T_c_hx, T_c_j2, T_c_pcm) with P_d and P_pcm substituted.
  LinearSystem assemble(const PlantParams &p, const PcmDesign &design,
                        double T_d, const FlowSplit &f, double Q_hx) {
    LinearSystem sys;
    auto &a = sys.a;
    auto &b = sys.b;
    const double cp = p.c_p;

    a[0] = {-p.m_dot_d * cp, 0.0, f.m_1 * cp, 0.0, f.m_pcm * cp};
    b[0] = 0.0;

    a[1] = {p.m_dot_d * cp, -(p.m_dot_d * cp + p.hA_dc), 0.0, 0.0, 0.0};
    b[1] = -p.hA_dc * T_d;

    if (f.m_hx > 0.0) {
      a[2] = {0.0, f.m_hx * cp, -f.m_hx * cp, 0.0, 0.0};
      b[2] = Q_hx;
    } else {
      if (Q_hx > 0.0) {
        std::ostringstream os;
        os << "heat exchanger branch carries no flow but Q_hx = " << Q_hx
           << " W is commanded";
        throw InfeasibleError(os.str());
      }
      a[2] = {0.0, 1.0, -1.0, 0.0, 0.0};
      b[2] = 0.0;
      sys.hx_bypassed = true;
    }

    if (f.m_pcm > 0.0) {
      a[3] = {0.0, f.m_3 * cp, f.m_2 * cp, -f.m_pcm * cp, 0.0};
      b[3] = 0.0;
    } else {
      a[3] = {0.0, 0.0, 0.0, 1.0, 0.0};
      b[3] = design.T_m;
      sys.pcm_bypassed = true;
    }

    a[4] = {0.0, 0.0, 0.0, f.m_pcm * cp, -(f.m_pcm * cp + p.hA_cpcm)};
    b[4] = -p.hA_cpcm * design.T_m;

    for (int i = 0; i < kDim; ++i) {
      double m = 0.0;
      for (int j = 0; j < kDim; ++j)
        m = std::max(m, std::abs(a[i][j]));
      sys.row_scale[i] = 1.0 / m;
      for (int j = 0; j < kDim; ++j)
        a[i][j] *= sys.row_scale[i];
      b[i] *= sys.row_scale[i];
    }
    return sys;
  }

  [[noreturn]] void throw_singular(const LinearSystem &sys, const Lu5 &lu,
                                   const FlowSplit &f) {
    const double cond = condition_estimate(sys.a, lu);
    std::ostringstream os;
    os << "coolant system is singular (cond1 = " << cond
       << ", m_hx = " << f.m_hx << ", m_pcm = " << f.m_pcm << ")";
    throw NumericalError(os.str(), cond);
  }

  /// Solves the factored system. A bypassed PCM branch pins its
  /// temperatures to T_m exactly rather than up to roundoff.
  Vec5 solve_system(const LinearSystem &sys, const Lu5 &lu,
                    const PcmDesign &design) {
    Vec5 x = lu.solve(sys.b);
    if (sys.pcm_bypassed) {
      x[kJ2] = design.T_m;
      x[kCpcm] = design.T_m;
    }
    return x;
  }

  CoolantSolution finish(const PlantParams &p, const PcmDesign &design,
                         double T_d, double Q_hx, const Vec5 &x) {
    CoolantSolution out;
    out.state = {x[kJ1], x[kCd], x[kHx], x[kJ2], x[kCpcm]};
    out.flows.P_d = p.hA_dc * (T_d - x[kCd]);
    out.flows.P_pcm = p.hA_cpcm * (x[kCpcm] - design.T_m);
    out.flows.Q_hx = Q_hx;
    return out;
  }

  void validate_inputs(const PlantParams &params, const PcmDesign &design,
                       double T_d, const ValveCommand &v, double Q_hx) {
    params.validate();
    v.validate();
    if (!std::isfinite(T_d) || !std::isfinite(design.T_m))
      throw DomainError("temperatures must be finite");
    if (!(Q_hx >= 0.0) || !std::isfinite(Q_hx))
      throw DomainError("Q_hx must be nonnegative and finite");
  }
} // namespace

void PlantParams::validate() const {
  require_positive(C_d, "C_d");
  require_positive(hA_dc, "hA_dc");
  require_positive(hA_cpcm, "hA_cpcm");
  require_positive(m_dot_d, "m_dot_d");
  require_positive(c_p, "c_p");
  require_positive(A_s, "A_s");
  require_positive(h_inf, "h_inf");
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw DomainError("alpha must lie in (0, 1]");
  if (!(eta_pv >= 0.0 && eta_pv < 1.0))
    throw DomainError("eta_pv must lie in [0, 1)");
}

PcmDesign PcmDesign::from_mass(double mass_kg, double latent_heat_j_per_kg,
                               double T_m) {
  require_positive(mass_kg, "PCM mass");
  require_positive(latent_heat_j_per_kg, "latent heat of fusion");
  PcmDesign d{mass_kg * latent_heat_j_per_kg, T_m};
  d.validate();
  return d;
}

void PcmDesign::validate() const {
  require_positive(C_pcm, "C_pcm");
  if (!std::isfinite(T_m))
    throw DomainError("T_m must be finite");
}

void ValveCommand::validate() const {
  if (!(v1 >= 0.0 && v1 <= 1.0))
    throw DomainError("valve command v1 must lie in [0, 1] (got " +
                      std::to_string(v1) + ")");
  if (!(v2 >= 0.0 && v2 <= 1.0))
    throw DomainError("valve command v2 must lie in [0, 1] (got " +
                      std::to_string(v2) + ")");
}

FlowSplit flow_split(const ValveCommand &v, double m_dot_d) {
  v.validate();
  require_positive(m_dot_d, "m_dot_d");
  // Every branch flow is snapped to a multiple of q = ulp(m_dot_d). Sums
  // and differences of such multiples that stay <= m_dot_d are exact, so
  // the three mass balances hold bit-for-bit. The snap moves each flow by
  // at most q/2.
  const double q = ulp_of(m_dot_d);
  auto snap = [q](double x) { return std::nearbyint(x / q) * q; };
  FlowSplit f;
  f.m_3 = snap(v.v2 * m_dot_d);
  f.m_hx = m_dot_d - f.m_3;
  f.m_2 = std::min(snap(v.v1 * f.m_hx), f.m_hx);
  f.m_1 = f.m_hx - f.m_2;
  f.m_pcm = m_dot_d - f.m_1;
  return f;
}

FlowSplitDerivative flow_split_derivative(const ValveCommand &v,
                                          double m_dot_d) {
  const double v1 = v.v1;
  const double v2 = v.v2;
  FlowSplitDerivative d;
  d.d_v1 = {0.0, (1.0 - v2) * m_dot_d, -(1.0 - v2) * m_dot_d,
            (1.0 - v2) * m_dot_d, 0.0};
  d.d_v2 = {-m_dot_d, (1.0 - v1) * m_dot_d, -(1.0 - v1) * m_dot_d,
            -v1 * m_dot_d, m_dot_d};
  return d;
}

CoolantSolution solve_coolant(const PlantParams &params,
                              const PcmDesign &design, double T_d,
                              const ValveCommand &v, double Q_hx) {
  validate_inputs(params, design, T_d, v, Q_hx);
  const FlowSplit f = flow_split(v, params.m_dot_d);
  const LinearSystem sys = assemble(params, design, T_d, f, Q_hx);
  const Lu5 lu(sys.a);
  if (lu.singular())
    throw_singular(sys, lu, f);
  return finish(params, design, T_d, Q_hx, solve_system(sys, lu, design));
}

PowerSensitivity coolant_sensitivity(const PlantParams &params,
                                     const PcmDesign &design, double T_d,
                                     const ValveCommand &v, double Q_hx) {
  validate_inputs(params, design, T_d, v, Q_hx);
  const FlowSplit f = flow_split(v, params.m_dot_d);
  const LinearSystem sys = assemble(params, design, T_d, f, Q_hx);
  const Lu5 lu(sys.a);
  if (lu.singular())
    throw_singular(sys, lu, f);
  const Vec5 x = solve_system(sys, lu, design);

  PowerSensitivity out;
  out.solution = finish(params, design, T_d, Q_hx, x);

  // Right-hand sides d(b)/d(theta) - d(A)/d(theta) x of the tangent system,
  // one per input, in the row-scaled frame.
  std::array<Vec5, kNumInputs> rhs{};
  const auto &s = sys.row_scale;
  rhs[kTd][1] = -params.hA_dc * s[1];
  rhs[kTm][4] = -params.hA_cpcm * s[4];
  if (sys.pcm_bypassed)
    rhs[kTm][3] = s[3];
  if (!sys.hx_bypassed)
    rhs[kQhx][2] = s[2];

  const FlowSplitDerivative df = flow_split_derivative(v, params.m_dot_d);
  const double cp = params.c_p;
  auto valve_rhs = [&](const FlowSplit &dm, Vec5 &r) {
    r[0] = -s[0] * cp * (dm.m_1 * x[kHx] + dm.m_pcm * x[kCpcm]);
    r[1] = 0.0;
    r[2] = sys.hx_bypassed ? 0.0 : -s[2] * cp * dm.m_hx * (x[kCd] - x[kHx]);
    r[3] = sys.pcm_bypassed
               ? 0.0
               : -s[3] * cp *
                     (dm.m_3 * x[kCd] + dm.m_2 * x[kHx] - dm.m_pcm * x[kJ2]);
    r[4] = -s[4] * cp * dm.m_pcm * (x[kJ2] - x[kCpcm]);
  };
  valve_rhs(df.d_v1, rhs[kV1]);
  valve_rhs(df.d_v2, rhs[kV2]);

  Vec5 e_cd{};
  e_cd[kCd] = 1.0;
  Vec5 e_cpcm{};
  e_cpcm[kCpcm] = 1.0;
  const Vec5 adj_cd = lu.solve_transposed(e_cd);
  const Vec5 adj_cpcm = lu.solve_transposed(e_cpcm);

  for (int k = 0; k < kNumInputs; ++k) {
    double dT_cd = 0.0;
    double dT_cpcm = 0.0;
    for (int i = 0; i < kDim; ++i) {
      dT_cd += adj_cd[i] * rhs[k][i];
      dT_cpcm += adj_cpcm[i] * rhs[k][i];
    }
    out.dP_d[k] = params.hA_dc * ((k == kTd ? 1.0 : 0.0) - dT_cd);
    out.dP_pcm[k] = params.hA_cpcm * (dT_cpcm - (k == kTm ? 1.0 : 0.0));
  }
  return out;
}

BoundaryHeat pv_boundary(const PlantParams &params, double G, double T_inf,
                         double T_d) {
  params.validate();
  if (!(G >= 0.0) || !std::isfinite(G))
    throw DomainError("irradiance G must be nonnegative and finite");
  BoundaryHeat q;
  q.Q_in = params.alpha * params.A_s * G;
  q.Q_out = params.h_inf * params.A_s * (T_d - T_inf) + params.eta_pv * q.Q_in;
  return q;
}

} // namespace pcmforge::plant
