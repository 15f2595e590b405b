#pragma once

// Reduced aerodynamics of the subsonic panel: the delay horizon of the
// rectangle, the sliding displacement history, the delayed potential
//
//   q(x, y, t) = 1/(2 pi) * int_0^{t*} ds int_0^{2 pi} dtheta
//                [sin^2 th u_xx + 2 sin th cos th u_xy + cos^2 th u_yy]
//                (x - (U + sin th) s,  y - s cos th,  t - s)
//
// acting on the zero-extended past displacement, and the pointwise
// reconstruction of the downwash-generated flow potential and its time
// derivative in the half space z >= 0.

#include <deque>
#include <optional>

#include "panelflow/field.hpp"

namespace panelflow {

struct AeroParams {
  double U = 0.0;    // free-stream speed ratio, subsonic: 0 <= U < 1
  int theta_n = 64;  // angular quadrature nodes (periodic trapezoid)
  int s_n = 64;      // retreat-time quadrature nodes (composite trapezoid)
};

// Throws ValidationError on U outside [0,1) or quadrature counts below 16.
void validate_aero(const AeroParams& params);

// Exact escape horizon of the rectangle: the smallest time T such that the
// retreating point (x - (U + sin th) s, y - s cos th) has left the open
// rectangle for every start point, every angle, and every s > T.
//
// Per angle, the worst start survives until min(Lx/|U+sin th|, Ly/|cos th|);
// the maximum over angles is attained where the two exit constraints cross,
// at sin th = -s0 with s0 in (U, 1) solving Lx^2 (1 - s0^2) = Ly^2 (s0 - U)^2:
//
//   s0 = [U Ly^2 + Lx sqrt(Lx^2 + Ly^2 (1 - U^2))] / (Lx^2 + Ly^2),
//   t* = Lx / (s0 - U) = Ly / sqrt(1 - s0^2).
//
// At U = 0 this reduces to the diameter of the rectangle.
double t_star(const PlateGrid& grid, double U);

// The simple bound diameter/(1-U): the retreat speed is at least 1-U in every
// direction. Equals t_star at U = 0 and strictly exceeds it for U > 0.
double t_star_bound(const PlateGrid& grid, double U);

// One stored time level. Derivative fields are cached on insertion because
// every aero evaluation consumes them many times.
struct HistorySlot {
  double time = 0.0;
  ScalarField u, ut;
  ScalarField ux, uxx, uxy, uyy;  // derivatives of u (zero-ring stencils)
  ScalarField utx, uty;           // first derivatives of ut
};

// Uniformly spaced sliding window of past plate states. Lookups are phrased
// in lags from the newest slot and never touch absolute times, so shifting
// every slot time by a constant cannot change any evaluation.
//
// An optional tail slot represents the state assumed at all times older than
// the stored window (frozen prehistory); a history consisting of only the
// tail describes a time-independent state.
class DelayHistory {
public:
  // capacity = ceil(horizon/dt) + 2 slots.
  DelayHistory(const PlateGrid& grid, double dt, double horizon);

  // Time-independent state u0 (with formal velocity ut0): a single tail slot.
  static DelayHistory frozen(const ScalarField& u0, const ScalarField& ut0);

  void set_tail(const ScalarField& u, const ScalarField& ut);
  // t must equal the previous slot time + dt (uniform spacing is validated).
  void append(double t, const ScalarField& u, const ScalarField& ut);

  const PlateGrid& grid() const { return grid_; }
  double dt() const { return dt_; }
  int capacity() const { return capacity_; }
  int size() const { return static_cast<int>(slots_.size()); }
  bool has_tail() const { return tail_.has_value(); }
  double t_now() const;

  // State at time t_now - lag: value = (1-frac)*newer + frac*older.
  // older == nullptr means the newer slot is exact (frac = 0).
  struct LagRef {
    const HistorySlot* newer = nullptr;
    const HistorySlot* older = nullptr;
    double frac = 0.0;
  };
  LagRef at_lag(double lag) const;

  const HistorySlot& newest() const;

private:
  DelayHistory() = default;
  static HistorySlot make_slot(double t, const ScalarField& u, const ScalarField& ut);

  PlateGrid grid_;
  double dt_ = 1.0;
  int capacity_ = 1;
  std::deque<HistorySlot> slots_;
  std::optional<HistorySlot> tail_;
};

// Delayed potential at the history's current time, on interior grid nodes.
// Fast path: for a fixed quadrature node the retreat shift is the same for
// every grid node, so the bilinear zero-extension evaluation collapses to
// four weighted block shifts of the combined curvature array.
ScalarField q_potential(const DelayHistory& hist, const AeroParams& params, const PlateGrid& grid);

// Independent slow path: per-node quadrature with its own zero-extension
// bilinear stencil arithmetic, parallelized over node rows with a fixed
// per-node summation order. Used as the cross-check.
ScalarField q_potential_bruteforce(const DelayHistory& hist, const AeroParams& params,
                                   const PlateGrid& grid);

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;  // height above the plate plane, z >= 0

  bool operator==(const Point3&) const = default;
};

// Flow potential at p = (x, y, z), time t (t <= history time). Zero when
// t - z < 0 (causality) and when z >= t* (empty retreat interval).
double reconstruct_phi(const DelayHistory& hist, const AeroParams& params, const Point3& p,
                       double t);

// Time derivative of the flow potential: boundary terms at s = t* and s = z,
// the convective double integral, and the weakly singular s/sqrt(s^2-z^2)
// integral, the last integrated in sigma = sqrt(s^2 - z^2) which absorbs the
// weight exactly. All four terms carry the downwash u_t + U u_x (the data
// the kernel actually transports); this is what closes the trace identity.
double reconstruct_phi_t(const DelayHistory& hist, const AeroParams& params, const Point3& p,
                         double t);

// L2 norm over the plate of  [phi_t + U dx(phi)](z = 0) + u_t + U u_x + q,
// which the reduction predicts to vanish; dx(phi) is a centered difference of
// reconstruct_phi with spacing hx. Requires t to be the history time.
double trace_residual(const DelayHistory& hist, const AeroParams& params, const PlateGrid& grid,
                      double t);

}  // namespace panelflow
