#include "panelflow/aero.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "panelflow/parallel.hpp"

namespace panelflow {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTimeTol = 1e-9;
}  // namespace

void validate_aero(const AeroParams& params) {
  if (!(params.U >= 0.0 && params.U < 1.0)) {
    throw ValidationError("aero: U = " + std::to_string(params.U) +
                          " outside [0,1); subsonic only");
  }
  if (params.theta_n < 16 || params.s_n < 16) {
    throw ValidationError("aero: quadrature counts must be at least 16 (got theta_n = " +
                          std::to_string(params.theta_n) +
                          ", s_n = " + std::to_string(params.s_n) + ")");
  }
}

double t_star(const PlateGrid& grid, double U) {
  if (!(U >= 0.0 && U < 1.0)) {
    throw ValidationError("t_star: U = " + std::to_string(U) + " outside [0,1); subsonic only");
  }
  const double Lx = grid.Lx, Ly = grid.Ly;
  // Crossing of the two exit constraints, see header for the derivation.
  const double s0 =
      (U * Ly * Ly + Lx * std::sqrt(Lx * Lx + Ly * Ly * (1.0 - U * U))) / (Lx * Lx + Ly * Ly);
  return Lx / (s0 - U);
}

double t_star_bound(const PlateGrid& grid, double U) {
  if (!(U >= 0.0 && U < 1.0)) {
    throw ValidationError("t_star_bound: U = " + std::to_string(U) +
                          " outside [0,1); subsonic only");
  }
  return grid.diameter() / (1.0 - U);
}

// ---------------------------------------------------------------------------
// DelayHistory

HistorySlot DelayHistory::make_slot(double t, const ScalarField& u, const ScalarField& ut) {
  require_same_grid(u, ut, "DelayHistory slot");
  HistorySlot slot;
  slot.time = t;
  slot.u = u;
  slot.ut = ut;
  Derivs du = derivatives(u);
  slot.ux = std::move(du.fx);
  slot.uxx = std::move(du.fxx);
  slot.uxy = std::move(du.fxy);
  slot.uyy = std::move(du.fyy);
  Derivs dv = derivatives(ut);
  slot.utx = std::move(dv.fx);
  slot.uty = std::move(dv.fy);
  return slot;
}

DelayHistory::DelayHistory(const PlateGrid& grid, double dt, double horizon) : grid_(grid) {
  if (!(dt > 0.0)) throw ValidationError("DelayHistory: dt must be positive");
  if (!(horizon > 0.0)) throw ValidationError("DelayHistory: horizon must be positive");
  dt_ = dt;
  capacity_ = static_cast<int>(std::ceil(horizon / dt)) + 2;
}

DelayHistory DelayHistory::frozen(const ScalarField& u0, const ScalarField& ut0) {
  DelayHistory h;
  h.grid_ = u0.grid();
  h.dt_ = 1.0;
  h.capacity_ = 1;
  h.tail_ = make_slot(0.0, u0, ut0);
  return h;
}

void DelayHistory::set_tail(const ScalarField& u, const ScalarField& ut) {
  if (!(u.grid() == grid_)) throw ValidationError("DelayHistory::set_tail: grid mismatch");
  tail_ = make_slot(slots_.empty() ? 0.0 : slots_.front().time - dt_, u, ut);
}

void DelayHistory::append(double t, const ScalarField& u, const ScalarField& ut) {
  if (!(u.grid() == grid_)) throw ValidationError("DelayHistory::append: grid mismatch");
  if (!slots_.empty()) {
    const double expected = slots_.back().time + dt_;
    if (std::abs(t - expected) > kTimeTol * (1.0 + std::abs(t))) {
      throw ValidationError("DelayHistory::append: non-uniform slot time " + std::to_string(t) +
                            ", expected " + std::to_string(expected));
    }
  }
  slots_.push_back(make_slot(t, u, ut));
  while (static_cast<int>(slots_.size()) > capacity_) slots_.pop_front();
}

double DelayHistory::t_now() const {
  if (!slots_.empty()) return slots_.back().time;
  if (tail_) return tail_->time;
  throw ValidationError("DelayHistory: empty history has no current time");
}

const HistorySlot& DelayHistory::newest() const {
  if (!slots_.empty()) return slots_.back();
  if (tail_) return *tail_;
  throw ValidationError("DelayHistory: empty history");
}

DelayHistory::LagRef DelayHistory::at_lag(double lag) const {
  if (lag < -kTimeTol) throw ValidationError("DelayHistory::at_lag: negative lag");
  if (lag < 0.0) lag = 0.0;
  if (slots_.empty()) {
    if (tail_) return {&*tail_, nullptr, 0.0};
    throw ValidationError("DelayHistory::at_lag: empty history");
  }
  const double r = lag / dt_;
  auto k = static_cast<long>(std::floor(r));
  double frac = r - static_cast<double>(k);
  // Snap lags that are integer multiples of dt up to rounding noise.
  if (frac < 1e-9) {
    frac = 0.0;
  } else if (frac > 1.0 - 1e-9) {
    frac = 0.0;
    ++k;
  }
  const long newer = static_cast<long>(slots_.size()) - 1 - k;
  if (newer < 0) {
    if (tail_) return {&*tail_, nullptr, 0.0};
    throw ValidationError("DelayHistory::at_lag: history window too short for lag " +
                          std::to_string(lag));
  }
  if (frac == 0.0) return {&slots_[newer], nullptr, 0.0};
  if (newer - 1 >= 0) return {&slots_[newer], &slots_[newer - 1], frac};
  if (tail_) return {&slots_[newer], &*tail_, frac};
  throw ValidationError("DelayHistory::at_lag: history window too short for lag " +
                        std::to_string(lag));
}

// ---------------------------------------------------------------------------
// Delayed potential

namespace {

using Array = ScalarField::Array;

// dst += w * (src shifted by (dxg, dyg) grid units with bilinear weights and
// zero extension). Decomposing the shift into integer and fractional parts
// turns the per-node bilinear evaluation into four weighted block adds.
void accumulate_shifted(Array& dst, const Array& src, double dxg, double dyg, double w) {
  const long nx = dst.rows(), ny = dst.cols();
  const double fx = dxg - std::floor(dxg);
  const double fy = dyg - std::floor(dyg);
  const auto mx = static_cast<long>(std::floor(dxg));
  const auto my = static_cast<long>(std::floor(dyg));
  const long sx[2] = {mx, mx + 1};
  const long sy[2] = {my, my + 1};
  const double wx[2] = {1.0 - fx, fx};
  const double wy[2] = {1.0 - fy, fy};
  for (int a = 0; a < 2; ++a) {
    if (wx[a] == 0.0) continue;
    const long r0 = std::max(0L, sx[a]);
    const long r1 = std::min(nx - 1, nx - 1 + sx[a]);
    if (r0 > r1) continue;
    for (int b = 0; b < 2; ++b) {
      const double wab = w * wx[a] * wy[b];
      if (wab == 0.0) continue;
      const long c0 = std::max(0L, sy[b]);
      const long c1 = std::min(ny - 1, ny - 1 + sy[b]);
      if (c0 > c1) continue;
      dst.block(r0, c0, r1 - r0 + 1, c1 - c0 + 1) +=
          wab * src.block(r0 - sx[a], c0 - sy[b], r1 - r0 + 1, c1 - c0 + 1);
    }
  }
}

// Time-interpolated array for one cached slot field; avoids a copy when the
// lag hits a slot exactly.
const Array* blend_field(const DelayHistory::LagRef& lr, ScalarField HistorySlot::*field,
                         Array& scratch) {
  const Array& a = (lr.newer->*field).values();
  if (lr.older == nullptr) return &a;
  scratch = (1.0 - lr.frac) * a + lr.frac * (lr.older->*field).values();
  return &scratch;
}

// Time-interpolated zero-extension evaluation of one cached slot field.
double eval_lag(const DelayHistory::LagRef& lr, ScalarField HistorySlot::*field, double px,
                double py) {
  const double a = eval_extended(lr.newer->*field, px, py);
  if (lr.older == nullptr) return a;
  return (1.0 - lr.frac) * a + lr.frac * eval_extended(lr.older->*field, px, py);
}

struct ThetaTable {
  std::vector<double> sin_t, cos_t;
  double dth = 0.0;
  explicit ThetaTable(int n) : sin_t(n), cos_t(n), dth(2.0 * kPi / n) {
    for (int j = 0; j < n; ++j) {
      sin_t[j] = std::sin(j * dth);
      cos_t[j] = std::cos(j * dth);
    }
  }
};

void check_q_inputs(const DelayHistory& hist, const AeroParams& params, const PlateGrid& grid) {
  validate_aero(params);
  if (!(hist.grid() == grid)) {
    throw ValidationError("q_potential: history grid does not match target grid");
  }
}

}  // namespace

ScalarField q_potential(const DelayHistory& hist, const AeroParams& params, const PlateGrid& grid) {
  check_q_inputs(hist, params, grid);
  const double ts = t_star(grid, params.U);
  const int sn = params.s_n, tn = params.theta_n;
  const double ds = ts / (sn - 1);
  const ThetaTable tt(tn);
  const double ihx = 1.0 / grid.hx(), ihy = 1.0 / grid.hy();

  ScalarField q(grid);
  Array sxx, sxy, syy;                   // time-blend scratch
  Array g(grid.nx, grid.ny);             // combined curvature scratch
  for (int i = 0; i < sn; ++i) {
    const double s = i * ds;
    const double ws = ds * ((i == 0 || i == sn - 1) ? 0.5 : 1.0);
    const DelayHistory::LagRef lr = hist.at_lag(s);
    const Array* fxx = blend_field(lr, &HistorySlot::uxx, sxx);
    const Array* fxy = blend_field(lr, &HistorySlot::uxy, sxy);
    const Array* fyy = blend_field(lr, &HistorySlot::uyy, syy);
    for (int j = 0; j < tn; ++j) {
      const double sj = tt.sin_t[j], cj = tt.cos_t[j];
      g = (sj * sj) * (*fxx) + (2.0 * sj * cj) * (*fxy) + (cj * cj) * (*fyy);
      accumulate_shifted(q.values(), g, (params.U + sj) * s * ihx, s * cj * ihy,
                         ws * tt.dth / (2.0 * kPi));
    }
  }
  return q;
}

namespace {

// Time-blended curvature triple for one s node of the reference quadrature.
// For histories whose lag lands on a slot (frozen tails in particular) the
// pointers alias the cached slot arrays and no copy is made.
struct CurvatureSlice {
  const Array* xx = nullptr;
  const Array* xy = nullptr;
  const Array* yy = nullptr;
  Array oxx, oxy, oyy;  // owned storage when time interpolation is needed
};

// Zero-extension bilinear read of the three curvature fields at one point,
// sharing a single stencil computation.  Deliberately written out in full
// (coordinates, floor, clamp, boundary-ring zeros) rather than reusing the
// shifted-window arithmetic of the production path, so the two paths only
// agree if the shift/weight conventions match.
inline void gather3(const CurvatureSlice& cs, const PlateGrid& g, double xi, double eta,
                    double& wxx, double& wxy, double& wyy) {
  wxx = wxy = wyy = 0.0;
  if (xi < 0.0 || xi > g.nx + 1 || eta < 0.0 || eta > g.ny + 1) return;
  int ci = static_cast<int>(std::floor(xi));
  int cj = static_cast<int>(std::floor(eta));
  if (ci > g.nx) ci = g.nx;
  if (cj > g.ny) cj = g.ny;
  const double tx = xi - ci;
  const double ty = eta - cj;
  const double w00 = (1.0 - tx) * (1.0 - ty), w10 = tx * (1.0 - ty);
  const double w01 = (1.0 - tx) * ty, w11 = tx * ty;
  // Corner (a, b) of the full lattice maps to interior index (a-1, b-1);
  // reads outside the interior block are the zero ring / zero extension.
  const int i0 = ci - 1, j0 = cj - 1;
  const auto corner = [&](const Array& v, int a, int b) -> double {
    return (a >= 0 && a < g.nx && b >= 0 && b < g.ny) ? v(a, b) : 0.0;
  };
  if (i0 >= 0 && ci < g.nx && j0 >= 0 && cj < g.ny) {
    wxx = w00 * (*cs.xx)(i0, j0) + w10 * (*cs.xx)(ci, j0) + w01 * (*cs.xx)(i0, cj) +
          w11 * (*cs.xx)(ci, cj);
    wxy = w00 * (*cs.xy)(i0, j0) + w10 * (*cs.xy)(ci, j0) + w01 * (*cs.xy)(i0, cj) +
          w11 * (*cs.xy)(ci, cj);
    wyy = w00 * (*cs.yy)(i0, j0) + w10 * (*cs.yy)(ci, j0) + w01 * (*cs.yy)(i0, cj) +
          w11 * (*cs.yy)(ci, cj);
  } else {
    wxx = w00 * corner(*cs.xx, i0, j0) + w10 * corner(*cs.xx, ci, j0) +
          w01 * corner(*cs.xx, i0, cj) + w11 * corner(*cs.xx, ci, cj);
    wxy = w00 * corner(*cs.xy, i0, j0) + w10 * corner(*cs.xy, ci, j0) +
          w01 * corner(*cs.xy, i0, cj) + w11 * corner(*cs.xy, ci, cj);
    wyy = w00 * corner(*cs.yy, i0, j0) + w10 * corner(*cs.yy, ci, j0) +
          w01 * corner(*cs.yy, i0, cj) + w11 * corner(*cs.yy, ci, cj);
  }
}

}  // namespace

ScalarField q_potential_bruteforce(const DelayHistory& hist, const AeroParams& params,
                                   const PlateGrid& grid) {
  check_q_inputs(hist, params, grid);
  const double ts = t_star(grid, params.U);
  const int sn = params.s_n, tn = params.theta_n;
  const double ds = ts / (sn - 1);
  const ThetaTable tt(tn);
  const double ihx = 1.0 / grid.hx(), ihy = 1.0 / grid.hy();

  std::vector<CurvatureSlice> slices(sn);
  for (int i = 0; i < sn; ++i) {
    const DelayHistory::LagRef lr = hist.at_lag(i * ds);
    CurvatureSlice& cs = slices[i];
    if (lr.older == nullptr) {
      cs.xx = &lr.newer->uxx.values();
      cs.xy = &lr.newer->uxy.values();
      cs.yy = &lr.newer->uyy.values();
    } else {
      cs.oxx = (1.0 - lr.frac) * lr.newer->uxx.values() + lr.frac * lr.older->uxx.values();
      cs.oxy = (1.0 - lr.frac) * lr.newer->uxy.values() + lr.frac * lr.older->uxy.values();
      cs.oyy = (1.0 - lr.frac) * lr.newer->uyy.values() + lr.frac * lr.older->uyy.values();
      cs.xx = &cs.oxx;
      cs.xy = &cs.oxy;
      cs.yy = &cs.oyy;
    }
  }

  ScalarField q(grid);
  parallel_for(grid.nx, [&](int row0, int row1) {
    for (int k = row0; k < row1; ++k) {
      const double x = grid.x(k);
      for (int l = 0; l < grid.ny; ++l) {
        const double y = grid.y(l);
        double acc = 0.0;
        for (int i = 0; i < sn; ++i) {
          const double s = i * ds;
          const double ws = ds * ((i == 0 || i == sn - 1) ? 0.5 : 1.0);
          const CurvatureSlice& cs = slices[i];
          double acc_th = 0.0;
          for (int j = 0; j < tn; ++j) {
            const double sj = tt.sin_t[j], cj = tt.cos_t[j];
            const double xi = (x - (params.U + sj) * s - grid.x0) * ihx;
            const double eta = (y - s * cj - grid.y0) * ihy;
            double wxx, wxy, wyy;
            gather3(cs, grid, xi, eta, wxx, wxy, wyy);
            acc_th += sj * sj * wxx + 2.0 * sj * cj * wxy + cj * cj * wyy;
          }
          acc += ws * acc_th;
        }
        q(k, l) = acc * tt.dth / (2.0 * kPi);
      }
    }
  });
  return q;
}

// ---------------------------------------------------------------------------
// Flow reconstruction

namespace {

// Lag offset for evaluating at a query time in the stored past.
double lag_offset(const DelayHistory& hist, double t) {
  const double off = hist.t_now() - t;
  if (off < -kTimeTol) {
    throw ValidationError("flow reconstruction: query time is ahead of the stored history");
  }
  return std::max(0.0, off);
}

}  // namespace

double reconstruct_phi(const DelayHistory& hist, const AeroParams& params, const Point3& p,
                       double t) {
  validate_aero(params);
  if (p.z < 0.0) throw ValidationError("reconstruct_phi: z must be nonnegative");
  const double ts = t_star(hist.grid(), params.U);
  if (t - p.z < 0.0) return 0.0;  // causality factor
  if (p.z >= ts) return 0.0;      // empty retreat interval
  const double off = lag_offset(hist, t);
  const int sn = params.s_n, tn = params.theta_n;
  const double ds = (ts - p.z) / (sn - 1);
  const ThetaTable tt(tn);

  double acc = 0.0;
  for (int i = 0; i < sn; ++i) {
    const double s = p.z + i * ds;
    const double ws = ds * ((i == 0 || i == sn - 1) ? 0.5 : 1.0);
    const DelayHistory::LagRef lr = hist.at_lag(off + s);
    const double root = std::sqrt(std::max(0.0, s * s - p.z * p.z));
    double acc_th = 0.0;
    for (int j = 0; j < tn; ++j) {
      const double px = p.x - (params.U * s + root * tt.sin_t[j]);
      const double py = p.y - root * tt.cos_t[j];
      acc_th += eval_lag(lr, &HistorySlot::ut, px, py) +
                params.U * eval_lag(lr, &HistorySlot::ux, px, py);
    }
    acc += ws * acc_th;
  }
  return -acc * tt.dth / (2.0 * kPi);
}

namespace {

// Downwash w = u_t + U u_x carried by the reconstruction kernel, and its
// first derivatives, evaluated through the zero extension at a lagged time.
// The four-term derivative formula must differentiate the full kernel
// integrand, so every velocity slot carries w, not u_t alone; with bare u_t
// the trace identity picks up a spurious U * double integral of u_tx.
double eval_downwash(const DelayHistory::LagRef& lr, double U, double px, double py) {
  return eval_lag(lr, &HistorySlot::ut, px, py) + U * eval_lag(lr, &HistorySlot::ux, px, py);
}
double eval_downwash_x(const DelayHistory::LagRef& lr, double U, double px, double py) {
  return eval_lag(lr, &HistorySlot::utx, px, py) + U * eval_lag(lr, &HistorySlot::uxx, px, py);
}
double eval_downwash_y(const DelayHistory::LagRef& lr, double U, double px, double py) {
  return eval_lag(lr, &HistorySlot::uty, px, py) + U * eval_lag(lr, &HistorySlot::uxy, px, py);
}

}  // namespace

double reconstruct_phi_t(const DelayHistory& hist, const AeroParams& params, const Point3& p,
                         double t) {
  validate_aero(params);
  if (p.z < 0.0) throw ValidationError("reconstruct_phi_t: z must be nonnegative");
  const double ts = t_star(hist.grid(), params.U);
  if (t - p.z < 0.0) return 0.0;
  if (p.z >= ts) return 0.0;
  const double off = lag_offset(hist, t);
  const double U = params.U;
  const int sn = params.s_n, tn = params.theta_n;
  const ThetaTable tt(tn);

  // Boundary term at s = t*.
  double term_far = 0.0;
  {
    const DelayHistory::LagRef lr = hist.at_lag(off + ts);
    const double root = std::sqrt(std::max(0.0, ts * ts - p.z * p.z));
    for (int j = 0; j < tn; ++j) {
      const double px = p.x - (U * ts + root * tt.sin_t[j]);
      const double py = p.y - root * tt.cos_t[j];
      term_far += eval_downwash(lr, U, px, py);
    }
    term_far *= tt.dth;
  }

  // Boundary term at s = z: the shift is angle-independent there, so the
  // angular integral is 2 pi times a single evaluation.
  const double term_near =
      2.0 * kPi * eval_downwash(hist.at_lag(off + p.z), U, p.x - U * p.z, p.y);

  // Convective double integral, plain trapezoid in s.
  double term_conv = 0.0;
  {
    const double ds = (ts - p.z) / (sn - 1);
    for (int i = 0; i < sn; ++i) {
      const double s = p.z + i * ds;
      const double ws = ds * ((i == 0 || i == sn - 1) ? 0.5 : 1.0);
      const DelayHistory::LagRef lr = hist.at_lag(off + s);
      const double root = std::sqrt(std::max(0.0, s * s - p.z * p.z));
      double acc_th = 0.0;
      for (int j = 0; j < tn; ++j) {
        const double px = p.x - (U * s + root * tt.sin_t[j]);
        const double py = p.y - root * tt.cos_t[j];
        acc_th += eval_downwash_x(lr, U, px, py);
      }
      term_conv += ws * acc_th;
    }
    term_conv *= U * tt.dth;
  }

  // Weakly singular integral; sigma = sqrt(s^2 - z^2) turns
  // (s / sqrt(s^2 - z^2)) ds into d sigma exactly.
  double term_sing = 0.0;
  {
    const double sig_max = std::sqrt(std::max(0.0, ts * ts - p.z * p.z));
    const double dsig = sig_max / (sn - 1);
    for (int i = 0; i < sn; ++i) {
      const double sig = i * dsig;
      const double s = std::sqrt(p.z * p.z + sig * sig);
      const double ws = dsig * ((i == 0 || i == sn - 1) ? 0.5 : 1.0);
      const DelayHistory::LagRef lr = hist.at_lag(off + s);
      double acc_th = 0.0;
      for (int j = 0; j < tn; ++j) {
        const double px = p.x - (U * s + sig * tt.sin_t[j]);
        const double py = p.y - sig * tt.cos_t[j];
        acc_th += tt.sin_t[j] * eval_downwash_x(lr, U, px, py) +
                  tt.cos_t[j] * eval_downwash_y(lr, U, px, py);
      }
      term_sing += ws * acc_th;
    }
    term_sing *= tt.dth;
  }

  return (term_far - term_near + term_conv + term_sing) / (2.0 * kPi);
}

double trace_residual(const DelayHistory& hist, const AeroParams& params, const PlateGrid& grid,
                      double t) {
  validate_aero(params);
  if (!(hist.grid() == grid)) {
    throw ValidationError("trace_residual: history grid does not match target grid");
  }
  if (std::abs(t - hist.t_now()) > kTimeTol * (1.0 + std::abs(t))) {
    throw ValidationError("trace_residual: t must equal the history's current time");
  }

  ScalarField resid(grid);
  const double hx = grid.hx();
  parallel_for(grid.nx, [&](int row0, int row1) {
    for (int i = row0; i < row1; ++i) {
      const double x = grid.x(i);
      for (int j = 0; j < grid.ny; ++j) {
        const double y = grid.y(j);
        const double pt = reconstruct_phi_t(hist, params, {x, y, 0.0}, t);
        const double pxp = reconstruct_phi(hist, params, {x + hx, y, 0.0}, t);
        const double pxm = reconstruct_phi(hist, params, {x - hx, y, 0.0}, t);
        resid(i, j) = pt + params.U * (pxp - pxm) / (2.0 * hx);
      }
    }
  });

  const HistorySlot& now = hist.newest();
  ScalarField q = q_potential(hist, params, grid);
  resid.values() += now.ut.values() + params.U * now.ux.values() + q.values();
  return norm_l2(resid);
}

}  // namespace panelflow
