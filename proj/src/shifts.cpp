#include "ghshift/shifts.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <string>
#include <thread>

namespace ghshift {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kAmpFloor = 1e-14;
const double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_channel(int channel) {
  if (channel < 0 || channel > 2) throw Error(Errc::invalid_argument, "channel index must be 0, 1 or 2");
}

void check_theta_range(double theta) {
  if (!(theta >= 0.0) || !(theta <= kPi / 2.0 - 1e-3))
    throw Error(Errc::invalid_argument, "incidence angle must lie in [0, pi/2 - 1e-3]");
}

// Shift phi by a multiple of 2 pi into (ref - pi, ref + pi].
double unwrap_near(double phi, double ref) {
  while (phi - ref > kPi) phi -= 2.0 * kPi;
  while (phi - ref <= -kPi) phi += 2.0 * kPi;
  return phi;
}

cplx pick(const ScatteringResult& r, int channel, WaveKind kind) {
  return kind == WaveKind::reflected ? r.R[channel] : r.T[channel];
}

// Derivative of f over a symmetric stencil around x0.  samples holds
// f(x0 - n h) .. f(x0 + n h) with n = 1 (central) or 2 (five-point); the
// center sample is included so phases can be unwrapped outward from it.
double stencil_derivative(const std::vector<double>& samples, double h, bool five_point) {
  if (!five_point) return (samples[2] - samples[0]) / (2.0 * h);
  return (samples[0] - 8.0 * samples[1] + 8.0 * samples[3] - samples[4]) / (12.0 * h);
}

// Phase samples for one channel/kind across a stencil of solves, unwrapped
// outward from the center sample.  extra(i) adds a smooth per-sample phase
// (the exit-face kx L term) before unwrapping.  Throws undefined_phase when
// any magnitude is at or below the floor.
template <typename ExtraPhase>
std::vector<double> phase_samples(const std::vector<ScatteringResult>& solves, int channel,
                                  WaveKind kind, ExtraPhase&& extra) {
  const std::size_t n = solves.size();
  std::vector<double> phi(n);
  for (std::size_t i = 0; i < n; ++i) {
    const cplx c = pick(solves[i], channel, kind);
    if (std::abs(c) <= kAmpFloor)
      throw Error(Errc::undefined_phase, "coefficient magnitude below 1e-14; phase undefined at stencil point");
    phi[i] = std::arg(c) + extra(i);
  }
  const std::size_t mid = n / 2;
  for (std::size_t i = mid; i-- > 0;) phi[i] = unwrap_near(phi[i], phi[i + 1]);
  for (std::size_t i = mid + 1; i < n; ++i) phi[i] = unwrap_near(phi[i], phi[i - 1]);
  return phi;
}

std::vector<double> stencil_offsets(bool five_point) {
  if (five_point) return {-2.0, -1.0, 0.0, 1.0, 2.0};
  return {-1.0, 0.0, 1.0};
}

std::vector<ScatteringResult> solve_theta_stencil(const SlabParams& p, const IncidentWave& w,
                                                  const FdOptions& fd) {
  std::vector<ScatteringResult> solves;
  for (double o : stencil_offsets(fd.five_point)) {
    const double th = w.theta + o * fd.step;
    solves.push_back(solve_scattering_k(p, w.k0 * std::cos(th), w.k0 * std::sin(th), w.in));
  }
  return solves;
}

double shift_theta_from_stencil(const std::vector<ScatteringResult>& solves, const IncidentWave& w,
                                double slab_length, int channel, WaveKind kind, const FdOptions& fd) {
  const auto offsets = stencil_offsets(fd.five_point);
  auto face_phase = [&](std::size_t i) {
    if (kind == WaveKind::reflected) return 0.0;
    return w.k0 * std::cos(w.theta + offsets[i] * fd.step) * slab_length;
  };
  const auto phi = phase_samples(solves, channel, kind, face_phase);
  return -stencil_derivative(phi, fd.step, fd.five_point) / (w.k0 * std::cos(w.theta));
}

}  // namespace

double lateral_shift_theta(const SlabParams& p, const IncidentWave& w, int channel, WaveKind kind,
                           const FdOptions& fd) {
  check_channel(channel);
  check_theta_range(w.theta);
  return shift_theta_from_stencil(solve_theta_stencil(p, w, fd), w, p.slab_length, channel, kind, fd);
}

double lateral_shift_kspace(const SlabParams& p, const IncidentWave& w, int channel, WaveKind kind,
                            const FdOptions& fd) {
  check_channel(channel);
  check_theta_range(w.theta);
  const double kx0 = w.kx(), ky0 = w.ky();
  const double h = fd.step * w.k0;
  const auto offsets = stencil_offsets(fd.five_point);
  auto no_extra = [](std::size_t) { return 0.0; };

  std::vector<ScatteringResult> along_kx, along_ky;
  for (double o : offsets) along_kx.push_back(solve_scattering_k(p, kx0 + o * h, ky0, w.in));
  for (double o : offsets) along_ky.push_back(solve_scattering_k(p, kx0, ky0 + o * h, w.in));
  const auto phi_kx = phase_samples(along_kx, channel, kind, no_extra);
  const auto phi_ky = phase_samples(along_ky, channel, kind, no_extra);
  const double dkx = stencil_derivative(phi_kx, h, fd.five_point);
  const double dky = stencil_derivative(phi_ky, h, fd.five_point);

  if (kind == WaveKind::transmitted) return (ky0 / kx0) * (p.slab_length + dkx) - dky;
  return (ky0 / kx0) * dkx - dky;
}

std::array<double, 2> amplitude_gradient(const SlabParams& p, const IncidentWave& w, int channel,
                                         WaveKind kind, const FdOptions& fd) {
  check_channel(channel);
  check_theta_range(w.theta);
  const double kx0 = w.kx(), ky0 = w.ky();
  const double h = fd.step * w.k0;
  const auto offsets = stencil_offsets(fd.five_point);

  auto log_mag = [&](const std::vector<ScatteringResult>& solves) {
    std::vector<double> s(solves.size());
    for (std::size_t i = 0; i < solves.size(); ++i) {
      const double a = std::abs(pick(solves[i], channel, kind));
      if (a <= kAmpFloor)
        throw Error(Errc::undefined_phase, "coefficient magnitude below 1e-14; log-magnitude undefined");
      s[i] = std::log(a);
    }
    return s;
  };

  std::vector<ScatteringResult> along_kx, along_ky;
  for (double o : offsets) along_kx.push_back(solve_scattering_k(p, kx0 + o * h, ky0, w.in));
  for (double o : offsets) along_ky.push_back(solve_scattering_k(p, kx0, ky0 + o * h, w.in));
  return {stencil_derivative(log_mag(along_kx), h, fd.five_point),
          stencil_derivative(log_mag(along_ky), h, fd.five_point)};
}

namespace {

ShiftRow compute_row(const SlabParams& p, double k0, double theta, const Vec3& in, const FdOptions& fd) {
  ShiftRow row;
  row.theta = theta;
  for (int j = 0; j < 3; ++j) {
    row.D_r[j] = row.D_t[j] = kNaN;
    row.prob_R[j] = row.prob_T[j] = kNaN;
  }
  row.total_flux = kNaN;

  IncidentWave w{k0, theta, in};
  ScatteringResult center;
  try {
    center = solve_scattering(p, w);
  } catch (const Error&) {
    return row;  // whole row is a gap
  }
  row.prob_R = center.prob_R;
  row.prob_T = center.prob_T;
  row.total_flux = center.total_flux;

  std::vector<ScatteringResult> solves;
  try {
    check_theta_range(theta);
    solves = solve_theta_stencil(p, w, fd);
  } catch (const Error&) {
    return row;  // probabilities stand, shifts are gaps
  }
  for (int j = 0; j < 3; ++j) {
    for (WaveKind kind : {WaveKind::reflected, WaveKind::transmitted}) {
      double d = kNaN;
      try {
        d = shift_theta_from_stencil(solves, w, p.slab_length, j, kind, fd);
      } catch (const Error&) {
      }
      (kind == WaveKind::reflected ? row.D_r : row.D_t)[j] = d;
    }
  }
  return row;
}

int resolve_threads(int requested, std::size_t n_rows) {
  int t = requested;
  if (t <= 0) {
    if (const char* env = std::getenv("GHSHIFT_THREADS")) t = std::atoi(env);
    if (t <= 0) t = static_cast<int>(std::thread::hardware_concurrency());
    if (t <= 0) t = 1;
  }
  return static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(t), std::max<std::size_t>(n_rows, 1)));
}

}  // namespace

std::vector<ShiftRow> sweep(const SlabParams& p, double k0, const std::vector<double>& theta_grid,
                            const Vec3& in, const SweepOptions& opt) {
  if (!(k0 > 0.0)) throw Error(Errc::invalid_argument, "incident wavenumber must be positive");
  for (std::size_t i = 0; i < theta_grid.size(); ++i) {
    const double th = theta_grid[i];
    if (!(th >= 0.0) || !(th < kPi / 2.0))
      throw Error(Errc::invalid_argument, "sweep angles must lie in [0, pi/2)");
    if (i > 0 && !(th > theta_grid[i - 1]))
      throw Error(Errc::invalid_argument, "sweep angles must be strictly increasing");
  }
  std::vector<ShiftRow> rows(theta_grid.size());
  if (rows.empty()) return rows;

  const int threads = resolve_threads(opt.threads, rows.size());
  if (threads <= 1) {
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = compute_row(p, k0, theta_grid[i], in, opt.fd);
    return rows;
  }

  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= rows.size()) return;
      rows[i] = compute_row(p, k0, theta_grid[i], in, opt.fd);
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  return rows;
}

}  // namespace ghshift
