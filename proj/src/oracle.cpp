#include "ghshift/oracle.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <memory>
#include <sstream>
#include <utility>

#include "ghshift/linalg.hpp"
#include "ghshift/model.hpp"

namespace ghshift {
namespace {

constexpr double kPi = 3.14159265358979323846;
const double kNaN = std::numeric_limits<double>::quiet_NaN();

// Mass-budget clearances, in units of the (time-dependent) packet width:
// initial tails clipped below 1e-10, absorber intake below 1e-6 at
// measurement time, lobe separation for valid masking.
constexpr double kClipSigmas = 6.7;
constexpr double kAbsorbSigmas = 5.4;
constexpr double kSeparationSigmas = 3.5;
constexpr double kLaunchSigmas = 4.3;   // launch-to-face distance (tail ~ 1e-5)
constexpr double kShiftMargin = 60.0;   // y headroom for the lateral shift itself
constexpr double kRegionFloor = 1e-12;  // below this a region has no centroid

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_pow2(double x) {
  std::size_t n = 16;
  while (static_cast<double>(n) < x) n <<= 1;
  return n;
}

double sq(double x) { return x * x; }

// FFT frequency axis: 2 pi m / (n d) with m wrapped to (-n/2, n/2].
std::vector<double> k_axis(std::size_t n, double d) {
  std::vector<double> k(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double m = (i < n / 2) ? static_cast<double>(i) : static_cast<double>(i) - static_cast<double>(n);
    k[i] = 2.0 * kPi * m / (static_cast<double>(n) * d);
  }
  return k;
}

struct FftBuf {
  cplx* p = nullptr;
  std::size_t n = 0;
  explicit FftBuf(std::size_t count) : n(count) {
    p = static_cast<cplx*>(fftw_malloc(sizeof(cplx) * count));
    if (!p) throw Error(Errc::invalid_argument, "grid allocation failed");
    std::fill(p, p + count, cplx(0.0, 0.0));
  }
  ~FftBuf() { fftw_free(p); }
  FftBuf(const FftBuf&) = delete;
  FftBuf& operator=(const FftBuf&) = delete;
};

// One in-place forward/backward plan pair, executable on any fftw_malloc'd
// buffer of the same shape.
struct FftPlans {
  fftw_plan fwd = nullptr, bwd = nullptr;
  FftPlans(std::size_t nx, std::size_t ny, cplx* rep) {
    auto* r = reinterpret_cast<fftw_complex*>(rep);
    if (ny == 1) {
      fwd = fftw_plan_dft_1d(static_cast<int>(nx), r, r, FFTW_FORWARD, FFTW_ESTIMATE);
      bwd = fftw_plan_dft_1d(static_cast<int>(nx), r, r, FFTW_BACKWARD, FFTW_ESTIMATE);
    } else {
      fwd = fftw_plan_dft_2d(static_cast<int>(ny), static_cast<int>(nx), r, r, FFTW_FORWARD, FFTW_ESTIMATE);
      bwd = fftw_plan_dft_2d(static_cast<int>(ny), static_cast<int>(nx), r, r, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
  }
  ~FftPlans() {
    if (fwd) fftw_destroy_plan(fwd);
    if (bwd) fftw_destroy_plan(bwd);
  }
  FftPlans(const FftPlans&) = delete;
  FftPlans& operator=(const FftPlans&) = delete;
  void forward(cplx* b) const { fftw_execute_dft(fwd, reinterpret_cast<fftw_complex*>(b), reinterpret_cast<fftw_complex*>(b)); }
  void backward(cplx* b) const { fftw_execute_dft(bwd, reinterpret_cast<fftw_complex*>(b), reinterpret_cast<fftw_complex*>(b)); }
};

double de_broglie(double k0) { return 2.0 * kPi / k0; }

// Shallow dressed level magnitude; the split-step time limit tracks it, not
// the deep level, because constant-in-space potentials split exactly and the
// deep dressed branch is essentially the flat detuning background.
double shallow_level(const SlabParams& p, double ky) {
  if (p.omega1 * p.omega1 + p.omega2 * p.omega2 < 1e-24) return 0.0;
  const auto dd = dressed_decomposition(p, effective_detunings(p, ky).delta);
  return std::min(std::abs(dd.values[0]), std::abs(dd.values[2]));
}

double excited_wavenumber(const SlabParams& p, double kx, double ky) {
  const cplx k3 = std::sqrt(cplx(kx * kx, 0.0) + 2.0 * effective_detunings(p, ky).delta);
  return std::abs(k3.real());
}

// Per-axis absorber attenuation factors exp(-damp dt), damp ~ cos^2 ramp
// peaking at the grid edge.  Scaled so the fastest channel present is fully
// absorbed in a single crossing.
std::vector<double> absorber_factors(std::size_t n, double d, double width, double rate, double dt) {
  std::vector<double> f(n, 1.0);
  if (width <= 0.0) return f;
  for (std::size_t i = 0; i < n; ++i) {
    const double dist = std::min(static_cast<double>(i), static_cast<double>(n - 1 - i)) * d;
    if (dist < width) f[i] = std::exp(-rate * sq(std::cos(kPi * dist / (2.0 * width))) * dt);
  }
  return f;
}

struct LobeRun {
  std::size_t lo = 0, hi = 0;  // row index range, inclusive
  double mass = 0.0;
  double y = 0.0;
};

// Bimodality of a y-marginal: lobes are runs above 10% of the peak whose own
// peak reaches 15%; two or more such runs mean the packet has split.
std::vector<LobeRun> marginal_lobes(const std::vector<double>& m, double y_min, double dy) {
  std::vector<LobeRun> runs;
  const double peak = *std::max_element(m.begin(), m.end());
  if (!(peak > 0.0)) return runs;
  const double cut = 0.10 * peak, keep = 0.15 * peak;
  std::size_t i = 0;
  while (i < m.size()) {
    if (m[i] < cut) {
      ++i;
      continue;
    }
    LobeRun r;
    r.lo = i;
    double rp = 0.0, sy = 0.0;
    while (i < m.size() && m[i] >= cut) {
      rp = std::max(rp, m[i]);
      r.mass += m[i];
      sy += (y_min + static_cast<double>(i) * dy) * m[i];
      ++i;
    }
    r.hi = i - 1;
    if (rp >= keep && r.mass > 0.0) {
      r.y = sy / r.mass;
      runs.push_back(r);
    }
  }
  return runs;
}

struct LaunchGeometry {
  double x0 = 0.0, y0 = 0.0;
  double t_final = 0.0;
  double spread_width = 0.0;  // packet width at t_final
  double travel = 0.0;        // post-face flight distance of the slow lobes
};

double resolve_x0(const PacketSpec& spec) {
  if (spec.center[0] != 0.0) return spec.center[0];
  return -(kLaunchSigmas * spec.width + 2.0 * de_broglie(spec.k0));
}

LaunchGeometry launch_geometry(const SlabParams& p, const PacketSpec& spec) {
  LaunchGeometry lg;
  const double vx = spec.k0 * std::cos(spec.theta);
  if (!(vx > 0.02 * spec.k0))
    throw Error(Errc::grid_invalid, "grazing incidence: normal velocity too small for automatic grid sizing");
  lg.x0 = resolve_x0(spec);
  lg.y0 = (spec.center[0] == 0.0 && spec.center[1] == 0.0) ? lg.x0 * std::tan(spec.theta) : spec.center[1];
  const double W = spec.width;
  double t = (-lg.x0 + p.slab_length + kSeparationSigmas * W) / vx;
  for (int it = 0; it < 3; ++it) {
    lg.spread_width = W * std::sqrt(1.0 + sq(t / (2.0 * W * W)));
    t = (-lg.x0 + p.slab_length + (kSeparationSigmas + 1.5) * lg.spread_width) / vx;
  }
  lg.t_final = t;
  lg.travel = vx * t + lg.x0;  // x0 < 0
  return lg;
}

void append_hard(std::string& hard, const std::string& msg) {
  if (!hard.empty()) hard += "; ";
  hard += msg;
}

}  // namespace

std::vector<std::string> validate_grid(const GridSpec& g, const SlabParams& p,
                                       const PacketSpec& spec, bool force_absorber) {
  std::vector<std::string> warnings;
  std::string hard;
  const bool two_d = g.ny > 1;

  if (!is_pow2(g.nx) || g.nx < 16) append_hard(hard, "nx must be a power of two, at least 16");
  if (two_d && (!is_pow2(g.ny) || g.ny < 16)) append_hard(hard, "ny must be a power of two, at least 16");
  if (!(g.dx > 0.0)) append_hard(hard, "dx must be positive");
  if (two_d && !(g.dy > 0.0)) append_hard(hard, "dy must be positive");
  if (!(g.dt > 0.0)) append_hard(hard, "dt must be positive");
  if (g.n_steps == 0) append_hard(hard, "n_steps must be positive");
  if (!(spec.width > 0.0)) append_hard(hard, "packet width must be positive");
  if (!(spec.k0 > 0.0)) append_hard(hard, "central wavenumber must be positive");
  if (!hard.empty()) throw Error(Errc::grid_invalid, hard);

  const double x0 = resolve_x0(spec);
  if (!(x0 + 4.0 * spec.width < 0.0))
    append_hard(hard, "packet must start fully left of the slab (center_x + 4W < 0)");

  const double x_max = g.x_min + static_cast<double>(g.nx - 1) * g.dx;
  const double min_absorber = 8.0 * de_broglie(spec.k0);
  if (g.absorber_width < min_absorber) {
    std::ostringstream os;
    os << "absorber width " << g.absorber_width << " below 8 de Broglie wavelengths (" << min_absorber << ")";
    if (force_absorber)
      warnings.push_back(os.str() + " [forced]");
    else
      append_hard(hard, os.str());
  }
  if (2.0 * g.absorber_width > 0.5 * (x_max - g.x_min))
    append_hard(hard, "absorber consumes more than half the x domain");
  if (g.x_min + g.absorber_width > 0.0 || x_max - g.absorber_width < p.slab_length)
    append_hard(hard, "absorber overlaps the slab");

  const double kx0 = spec.k0 * std::cos(spec.theta);
  const double ky0 = spec.k0 * std::sin(spec.theta);
  const double bundle = 3.0 / (2.0 * spec.width);
  if (kPi / g.dx < 3.0 * (kx0 + bundle))
    append_hard(hard, "dx too coarse for the incident momentum bundle (need pi/dx >= 3 (kx0 + 3/(2W)))");
  if (two_d && kPi / g.dy < 3.0 * (std::abs(ky0) + p.k_l1 + p.k_l2 + bundle))
    append_hard(hard, "dy too coarse for the incident momentum bundle including photon recoil");

  const bool slab_on = p.omega1 * p.omega1 + p.omega2 * p.omega2 >= 1e-24 && p.slab_length > 0.0;
  if (slab_on && g.dx > de_broglie(spec.k0) / 5.5)
    append_hard(hard, "dx too coarse to resolve the slab interference structure (need >= 5.5 cells per de Broglie wavelength)");

  if (slab_on) {
    const double k3 = excited_wavenumber(p, kx0, ky0);
    if (kPi / g.dx < 1.3 * k3) {
      std::ostringstream os;
      os << "excited-channel wavenumber k3 = " << k3 << " beyond the grid Nyquist limit " << kPi / g.dx;
      if (std::abs(spec.internal[2]) > 0.0)
        append_hard(hard, os.str() + " while the excited state is populated");
      else
        warnings.push_back(os.str() + "; its (tiny) transmitted lobe will alias");
    }
    const double v_eff = shallow_level(p, ky0);
    if (g.dt * v_eff >= 0.1) {
      std::ostringstream os;
      os << "dt " << g.dt << " too coarse for the shallow dressed level " << v_eff
         << " (need dt min(|V+|,|V-|) < 0.1)";
      append_hard(hard, os.str());
    }
  }

  if (!hard.empty()) throw Error(Errc::grid_invalid, hard);
  return warnings;
}

GridSpec auto_grid_1d(const SlabParams& p, const PacketSpec& spec) {
  const auto lg = launch_geometry(p, spec);
  const double A = 8.0 * de_broglie(spec.k0);
  const double Wt = lg.spread_width;

  const double x_lo = std::min(lg.x0 - kClipSigmas * spec.width, -lg.travel - kAbsorbSigmas * Wt) - A;
  const double x_hi = p.slab_length + lg.travel + kAbsorbSigmas * Wt + A;

  const double kx0 = spec.k0 * std::cos(spec.theta);
  const double ky0 = spec.k0 * std::sin(spec.theta);
  double dx_target = std::min(kPi / (3.0 * (kx0 + 3.0 / (2.0 * spec.width))), de_broglie(spec.k0) / 5.5);
  const bool slab_on = p.omega1 * p.omega1 + p.omega2 * p.omega2 >= 1e-24 && p.slab_length > 0.0;
  if (slab_on) {
    const double k3 = excited_wavenumber(p, kx0, ky0);
    if (k3 > 0.0) dx_target = std::min(dx_target, kPi / (1.3 * k3));
  }

  GridSpec g;
  g.ny = 1;
  g.dy = 1.0;
  g.y_min = 0.0;
  const double span = x_hi - x_lo;
  g.nx = next_pow2(span / dx_target);
  if (g.nx > (std::size_t{1} << 22)) throw Error(Errc::grid_invalid, "automatic 1D grid exceeds 4M points");
  g.dx = span / static_cast<double>(g.nx);
  g.x_min = x_lo;
  const double v_eff = shallow_level(p, ky0);
  g.dt = std::min(0.7, v_eff > 0.0 ? 0.099 / v_eff : 0.7);
  g.n_steps = static_cast<std::size_t>(std::ceil(lg.t_final / g.dt));
  g.absorber_width = A;
  return g;
}

GridSpec auto_grid_2d(const SlabParams& p, const PacketSpec& spec) {
  const auto lg = launch_geometry(p, spec);
  const double A = 8.0 * de_broglie(spec.k0);
  const double Wt = lg.spread_width;
  const double W = spec.width;
  const double vy = spec.k0 * std::sin(spec.theta);
  const double recoil = p.k_l1 + p.k_l2;

  const double x_lo = std::min(lg.x0 - kClipSigmas * W, -lg.travel - kAbsorbSigmas * Wt) - A;
  const double x_hi = p.slab_length + lg.travel + kAbsorbSigmas * Wt + A;
  const double y_lo = lg.y0 - kClipSigmas * W - kShiftMargin - A;
  const double y_hi = lg.y0 + (vy + recoil) * lg.t_final + kAbsorbSigmas * Wt + kShiftMargin + A;

  const double kx0 = spec.k0 * std::cos(spec.theta);
  const double ky0 = vy;
  const double bundle = 3.0 / (2.0 * W);
  const double dx_hard = std::min(kPi / (3.0 * (kx0 + bundle)), de_broglie(spec.k0) / 5.5);
  const double dy_hard = kPi / (3.0 * (std::abs(ky0) + recoil + bundle));

  GridSpec g;
  g.nx = next_pow2((x_hi - x_lo) / dx_hard);
  g.ny = next_pow2((y_hi - y_lo) / dy_hard);
  if (g.nx * g.ny > (std::size_t{1} << 23)) throw Error(Errc::grid_invalid, "automatic 2D grid exceeds 8M points");
  g.dx = (x_hi - x_lo) / static_cast<double>(g.nx);
  g.dy = (y_hi - y_lo) / static_cast<double>(g.ny);
  g.x_min = x_lo;
  g.y_min = y_lo;
  const double v_eff = shallow_level(p, ky0);
  g.dt = std::min(0.4, v_eff > 0.0 ? 0.099 / v_eff : 0.4);
  g.n_steps = static_cast<std::size_t>(std::ceil(lg.t_final / g.dt));
  g.absorber_width = A;
  return g;
}

Field3 gaussian_packet(const PacketSpec& spec, const GridSpec& g) {
  if (!(spec.width > 0.0)) throw Error(Errc::invalid_argument, "packet width must be positive");
  const double amp2 = norm2(spec.internal);
  if (!(amp2 > 0.0)) throw Error(Errc::invalid_argument, "internal amplitude vector is empty");
  const double inv_amp = 1.0 / std::sqrt(amp2);

  const bool two_d = g.ny > 1;
  const double x0 = resolve_x0(spec);
  const double y0 = (spec.center[0] == 0.0 && spec.center[1] == 0.0 && two_d) ? x0 * std::tan(spec.theta)
                                                                              : spec.center[1];
  const double kx = spec.k0 * std::cos(spec.theta);
  const double ky = spec.k0 * std::sin(spec.theta);
  const double W = spec.width;

  Field3 f;
  const std::size_t n = g.nx * g.ny;
  const double norm_pref = two_d ? std::pow(2.0 * kPi * W * W, -0.5) : std::pow(2.0 * kPi * W * W, -0.25);
  for (int s = 0; s < 3; ++s) f.comp[s].assign(n, cplx(0.0, 0.0));

  double total = 0.0;
  for (std::size_t iy = 0; iy < g.ny; ++iy) {
    const double y = g.y_min + static_cast<double>(iy) * g.dy;
    for (std::size_t ix = 0; ix < g.nx; ++ix) {
      const double x = g.x_min + static_cast<double>(ix) * g.dx;
      const double r2 = sq(x - x0) + (two_d ? sq(y - y0) : 0.0);
      const double env = norm_pref * std::exp(-r2 / (4.0 * W * W));
      const std::size_t idx = iy * g.nx + ix;
      for (int s = 0; s < 3; ++s) {
        if (spec.internal[s] == cplx(0.0, 0.0)) continue;
        const double phase = kx * x + (two_d ? ky * y : 0.0);
        f.comp[s][idx] = spec.internal[s] * inv_amp * env * std::polar(1.0, phase);
      }
      total += sq(env);
    }
  }
  const double cell = g.dx * (two_d ? g.dy : 1.0);
  total *= cell;
  if (std::abs(1.0 - total) > 1e-10) {
    std::ostringstream os;
    os << "initial packet norm on the grid is " << total << "; more than 1e-10 of the mass is clipped";
    throw Error(Errc::packet_clipped, os.str());
  }
  const double fix = 1.0 / std::sqrt(total);
  for (int s = 0; s < 3; ++s)
    for (auto& v : f.comp[s]) v *= fix;
  return f;
}

std::array<double, 2> require_centroid(const RegionStat& r) {
  if (!r.defined) throw Error(Errc::empty_region, "region norm below 1e-12; centroid undefined");
  return r.centroid;
}

CentroidReport extract_centroids(const Field3& f, const GridSpec& g, double slab_length) {
  CentroidReport rep;
  rep.grid = g;
  for (int s = 0; s < 3; ++s) {
    rep.D_r[s] = rep.D_t[s] = rep.D_t_excess[s] = kNaN;
    if (f.comp[s].size() != g.nx * g.ny) throw Error(Errc::invalid_argument, "field size does not match grid");
  }
  const bool two_d = g.ny > 1;
  const double cell = g.dx * (two_d ? g.dy : 1.0);

  for (int s = 0; s < 3; ++s) {
    std::array<RegionStat*, 3> regions = {&rep.reflected[s], &rep.interior[s], &rep.transmitted[s]};
    std::array<double, 3> sx{}, sy{};
    std::array<std::vector<double>, 3> marginals;
    if (two_d)
      for (auto& m : marginals) m.assign(g.ny, 0.0);

    for (std::size_t iy = 0; iy < g.ny; ++iy) {
      const double y = g.y_min + static_cast<double>(iy) * g.dy;
      for (std::size_t ix = 0; ix < g.nx; ++ix) {
        const double x = g.x_min + static_cast<double>(ix) * g.dx;
        const double w = std::norm(f.comp[s][iy * g.nx + ix]) * cell;
        if (w == 0.0) continue;
        const int r = x < 0.0 ? 0 : (x > slab_length ? 2 : 1);
        regions[r]->norm += w;
        sx[r] += x * w;
        sy[r] += y * w;
        if (two_d) marginals[r][iy] += w;
      }
    }
    for (int r = 0; r < 3; ++r) {
      RegionStat& st = *regions[r];
      st.defined = st.norm >= kRegionFloor;
      if (st.defined) {
        st.centroid = {sx[r] / st.norm, sy[r] / st.norm};
        if (two_d) {
          auto runs = marginal_lobes(marginals[r], g.y_min, g.dy);
          st.split = runs.size() >= 2;
          if (st.split)
            for (const auto& run : runs) st.lobes.push_back({run.mass, run.y, kNaN});
        }
      }
    }
    rep.prob_R[s] = rep.reflected[s].norm;
    rep.prob_T[s] = rep.transmitted[s].norm;
  }
  return rep;
}

namespace {

// Shared stepping state for both propagation paths.
struct Stepper {
  const GridSpec& g;
  std::array<FftBuf, 3> buf;
  FftPlans plans;
  std::vector<cplx> kinetic;          // per-cell e^{-i k^2 dt / 2}, 1/N folded in
  std::vector<double> mask_x, mask_y; // per-axis absorber factors
  std::array<double, 3> absorbed{};

  explicit Stepper(const GridSpec& grid, const Field3& init, double absorber_rate)
      : g(grid), buf{FftBuf(grid.nx * grid.ny), FftBuf(grid.nx * grid.ny), FftBuf(grid.nx * grid.ny)},
        plans(grid.nx, grid.ny, buf[0].p) {
    const std::size_t n = g.nx * g.ny;
    for (int s = 0; s < 3; ++s) std::copy(init.comp[s].begin(), init.comp[s].end(), buf[s].p);
    const auto kx = k_axis(g.nx, g.dx);
    const auto ky = g.ny > 1 ? k_axis(g.ny, g.dy) : std::vector<double>(1, 0.0);
    kinetic.resize(n);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t iy = 0; iy < g.ny; ++iy)
      for (std::size_t ix = 0; ix < g.nx; ++ix)
        kinetic[iy * g.nx + ix] =
            std::polar(inv_n, -0.5 * (sq(kx[ix]) + sq(ky[iy])) * g.dt);
    mask_x = absorber_factors(g.nx, g.dx, g.absorber_width, absorber_rate, g.dt);
    mask_y = g.ny > 1 ? absorber_factors(g.ny, g.dy, g.absorber_width, absorber_rate, g.dt)
                      : std::vector<double>(1, 1.0);
  }

  void kinetic_step() {
    for (int s = 0; s < 3; ++s) {
      plans.forward(buf[s].p);
      cplx* b = buf[s].p;
      for (std::size_t i = 0; i < kinetic.size(); ++i) b[i] *= kinetic[i];
      plans.backward(buf[s].p);
    }
  }

  void absorb_step() {
    const double cell = g.dx * (g.ny > 1 ? g.dy : 1.0);
    for (std::size_t iy = 0; iy < g.ny; ++iy) {
      const double my = mask_y[iy];
      for (std::size_t ix = 0; ix < g.nx; ++ix) {
        const double m = mask_x[ix] * my;
        if (m == 1.0) continue;
        const std::size_t i = iy * g.nx + ix;
        const double f2 = 1.0 - m * m;
        for (int s = 0; s < 3; ++s) {
          absorbed[s] += std::norm(buf[s].p[i]) * f2 * cell;
          buf[s].p[i] *= m;
        }
      }
    }
  }

  double total_norm() const {
    const double cell = g.dx * (g.ny > 1 ? g.dy : 1.0);
    double t = 0.0;
    for (int s = 0; s < 3; ++s)
      for (std::size_t i = 0; i < g.nx * g.ny; ++i) t += std::norm(buf[s].p[i]);
    return t * cell;
  }

  Field3 to_field() const {
    Field3 f;
    for (int s = 0; s < 3; ++s) f.comp[s].assign(buf[s].p, buf[s].p + g.nx * g.ny);
    return f;
  }
};

void apply_overrides_common(GridSpec& g, const OracleOverrides& ov) {
  const double span_x = static_cast<double>(g.nx) * g.dx;
  const double span_y = static_cast<double>(g.ny) * g.dy;
  const double t_final = static_cast<double>(g.n_steps) * g.dt;
  if (ov.nx) {
    g.nx = ov.nx;
    g.dx = span_x / static_cast<double>(g.nx);
  }
  if (ov.ny && g.ny > 1) {
    g.ny = ov.ny;
    g.dy = span_y / static_cast<double>(g.ny);
  }
  if (ov.dt > 0.0) {
    g.dt = ov.dt;
    g.n_steps = static_cast<std::size_t>(std::ceil(t_final / g.dt));
  }
  if (ov.n_steps) g.n_steps = ov.n_steps;
  if (ov.absorber_width > 0.0) g.absorber_width = ov.absorber_width;
}

void check_absorber_budget(const SlabParams& p, const std::array<double, 3>& absorbed) {
  if (p.gamma != 0.0) return;
  const double ground = absorbed[0] + absorbed[1];
  if (ground > 1e-6) {
    std::ostringstream os;
    os << "absorber consumed " << ground << " of ground-state norm at gamma = 0 (budget 1e-6); "
          "the geometry lets slow lobes reach the boundary";
    throw Error(Errc::absorber_leak, os.str());
  }
}

double absorber_rate_for(const SlabParams& p, const PacketSpec& spec, double width) {
  const double kx0 = spec.k0 * std::cos(spec.theta);
  const double ky0 = spec.k0 * std::sin(spec.theta);
  const bool slab_on = p.omega1 * p.omega1 + p.omega2 * p.omega2 >= 1e-24 && p.slab_length > 0.0;
  const double v_fast = slab_on ? std::max(spec.k0, excited_wavenumber(p, kx0, ky0)) : spec.k0;
  return 60.0 * v_fast / std::max(width, 1e-6);
}

struct SlabCells {
  std::size_t lo = 0, hi = 0;
  double f_lo = 1.0, f_hi = 1.0;  // covered fraction of the two end cells
  bool any = false;
};

// Cells are selected by overlap of the cell interval with [0, L]; the two end
// cells record their covered fraction so the effective slab length does not
// quantize to whole cells.
SlabCells slab_cells(const GridSpec& g, double slab_length) {
  SlabCells sc;
  const double h = 0.5 * g.dx;
  for (std::size_t ix = 0; ix < g.nx; ++ix) {
    const double c = g.x_min + static_cast<double>(ix) * g.dx;
    const double f = (std::min(slab_length, c + h) - std::max(0.0, c - h)) / g.dx;
    if (f <= 0.0) continue;
    if (!sc.any) {
      sc.lo = ix;
      sc.f_lo = std::min(f, 1.0);
      sc.any = true;
    }
    sc.hi = ix;
    sc.f_hi = std::min(f, 1.0);
  }
  return sc;
}

}  // namespace

Oracle1dReport propagate_1d(const SlabParams& p, const PacketSpec& spec, double ky_fixed,
                            const OracleOverrides& ov) {
  GridSpec g = auto_grid_1d(p, spec);
  apply_overrides_common(g, ov);
  validate_grid(g, p, spec, ov.force_absorber_width);

  const Field3 init = gaussian_packet(spec, g);
  Stepper st(g, init, absorber_rate_for(p, spec, g.absorber_width));

  // Half-step potential operators: full slab matrix inside (via its dressed
  // factorization), bare detuning on the excited component outside.
  const cplx delta = effective_detunings(p, ky_fixed).delta;
  const cplx iu(0.0, 1.0);
  const bool coupled = p.omega1 * p.omega1 + p.omega2 * p.omega2 >= 1e-24;
  Mat3 half_in = Mat3::identity();
  if (coupled) {
    const auto dd = dressed_decomposition(p, delta);
    Mat3 phases = Mat3::diag(std::exp(-iu * dd.values[0] * (0.5 * g.dt)),
                             std::exp(-iu * dd.values[1] * (0.5 * g.dt)),
                             std::exp(-iu * dd.values[2] * (0.5 * g.dt)));
    half_in = (dd.U * phases) * dd.U_inv;
  }
  const cplx half_out3 = std::exp(iu * delta * (0.5 * g.dt));  // exp(-i (-delta) dt/2)
  if (!coupled) half_in = Mat3::diag(cplx(1.0, 0.0), cplx(1.0, 0.0), half_out3);

  // The two end cells carry their own half-step matrices with couplings
  // scaled by the covered fraction; the excited detuning stays unscaled
  // because it acts outside the slab too.
  const SlabCells sc = slab_cells(g, p.slab_length);
  auto half_scaled = [&](double f) {
    SlabParams ps = p;
    ps.omega1 *= f;
    ps.omega2 *= f;
    return exp3((-iu * (0.5 * g.dt)) * potential_matrix(ps, delta));
  };
  const Mat3 half_lo = half_scaled(sc.f_lo);
  const Mat3 half_hi = half_scaled(sc.f_hi);
  const bool inside = coupled && sc.any;

  auto potential_half = [&]() {
    cplx* b0 = st.buf[0].p;
    cplx* b1 = st.buf[1].p;
    cplx* b2 = st.buf[2].p;
    for (std::size_t ix = 0; ix < g.nx; ++ix) {
      if (inside && ix >= sc.lo && ix <= sc.hi) {
        const Mat3& m = ix == sc.lo ? half_lo : (ix == sc.hi ? half_hi : half_in);
        const cplx v0 = b0[ix], v1 = b1[ix], v2 = b2[ix];
        b0[ix] = m(0, 0) * v0 + m(0, 1) * v1 + m(0, 2) * v2;
        b1[ix] = m(1, 0) * v0 + m(1, 1) * v1 + m(1, 2) * v2;
        b2[ix] = m(2, 0) * v0 + m(2, 1) * v1 + m(2, 2) * v2;
      } else {
        b2[ix] *= half_out3;
      }
    }
  };

  for (std::size_t step = 0; step < g.n_steps; ++step) {
    potential_half();
    st.kinetic_step();
    potential_half();
    st.absorb_step();
  }

  Oracle1dReport rep;
  rep.grid = g;
  rep.t_final = static_cast<double>(g.n_steps) * g.dt;
  rep.absorbed = st.absorbed;
  if (ov.capture_final) *ov.capture_final = st.to_field();
  double total = 0.0;
  for (int s = 0; s < 3; ++s) {
    const cplx* b = st.buf[s].p;
    for (std::size_t ix = 0; ix < g.nx; ++ix) {
      const double x = g.x_min + static_cast<double>(ix) * g.dx;
      const double w = std::norm(b[ix]) * g.dx;
      if (x < 0.0)
        rep.prob_R[s] += w;
      else if (x > p.slab_length)
        rep.prob_T[s] += w;
      else
        rep.interior[s] += w;
      total += w;
    }
  }
  rep.decayed = 1.0 - total - (st.absorbed[0] + st.absorbed[1] + st.absorbed[2]);
  check_absorber_budget(p, st.absorbed);
  return rep;
}

namespace {

struct LobeVelocity {
  double vx = 0.0, vy = 0.0;
  std::array<double, 2> centroid{};
  double norm = 0.0;
  bool ok = false;
};

// Momentum-expectation velocity of one masked lobe: columns limited to the
// region in x, rows to the lobe's y-run.  Exact for ballistic free flight.
LobeVelocity lobe_velocity(const Stepper& st, int s, double x_lo, double x_hi,
                           std::size_t row_lo, std::size_t row_hi, FftBuf& scratch) {
  const GridSpec& g = st.g;
  LobeVelocity lv;
  const double cell = g.dx * g.dy;
  double sx = 0.0, sy = 0.0;
  std::fill(scratch.p, scratch.p + g.nx * g.ny, cplx(0.0, 0.0));
  for (std::size_t iy = row_lo; iy <= row_hi; ++iy) {
    const double y = g.y_min + static_cast<double>(iy) * g.dy;
    for (std::size_t ix = 0; ix < g.nx; ++ix) {
      const double x = g.x_min + static_cast<double>(ix) * g.dx;
      if (x <= x_lo || x >= x_hi) continue;
      const cplx v = st.buf[s].p[iy * g.nx + ix];
      scratch.p[iy * g.nx + ix] = v;
      const double w = std::norm(v) * cell;
      lv.norm += w;
      sx += x * w;
      sy += y * w;
    }
  }
  if (lv.norm < kRegionFloor) return lv;
  lv.centroid = {sx / lv.norm, sy / lv.norm};

  st.plans.forward(scratch.p);
  const auto kxs = k_axis(g.nx, g.dx);
  const auto kys = k_axis(g.ny, g.dy);
  double wk = 0.0, skx = 0.0, sky = 0.0;
  for (std::size_t iy = 0; iy < g.ny; ++iy)
    for (std::size_t ix = 0; ix < g.nx; ++ix) {
      const double w = std::norm(scratch.p[iy * g.nx + ix]);
      wk += w;
      skx += kxs[ix] * w;
      sky += kys[iy] * w;
    }
  if (!(wk > 0.0)) return lv;
  lv.vx = skx / wk;
  lv.vy = sky / wk;
  lv.ok = true;
  return lv;
}

}  // namespace

CentroidReport propagate_2d(const SlabParams& p, const PacketSpec& spec, const GridSpec& g,
                            const OracleOverrides& ov) {
  if (g.ny <= 1) throw Error(Errc::grid_invalid, "2D propagation needs ny > 1");
  validate_grid(g, p, spec, ov.force_absorber_width);

  Field3 init = gaussian_packet(spec, g);
  // Photon-recoil offsets make the packet a lab-frame resonant state:
  // state 2 rides at ky + kL1 + kL2, the excited state at ky + kL1.
  const std::array<double, 3> recoil = {0.0, p.k_l1 + p.k_l2, p.k_l1};
  for (int s = 1; s < 3; ++s) {
    if (recoil[s] == 0.0) continue;
    for (std::size_t iy = 0; iy < g.ny; ++iy) {
      const cplx ph = std::polar(1.0, recoil[s] * (g.y_min + static_cast<double>(iy) * g.dy));
      for (std::size_t ix = 0; ix < g.nx; ++ix) init.comp[s][iy * g.nx + ix] *= ph;
    }
  }

  Stepper st(g, init, absorber_rate_for(p, spec, g.absorber_width));

  // Lab-frame level matrix: the two-photon shift delta0 retunes state 2 to
  // resonance at the packet's central ky; couplings carry no phase here, the
  // e^{i kL y} factors live in the per-row conjugation Q(y).
  const double ky0 = spec.k0 * std::sin(spec.theta);
  const double delta0_2ph = 0.5 * (sq(ky0 + p.k_l1 + p.k_l2) - sq(ky0));
  const cplx iu(0.0, 1.0);
  Mat3 vbar;
  vbar(0, 2) = vbar(2, 0) = -0.5 * p.omega1;
  vbar(1, 2) = vbar(2, 1) = -0.5 * p.omega2;
  vbar(1, 1) = -delta0_2ph;
  vbar(2, 2) = -cplx(p.delta0, 0.5 * p.gamma);
  const Mat3 e_half = exp3((-iu * (0.5 * g.dt)) * vbar);
  const cplx out1 = std::exp(iu * cplx(delta0_2ph, 0.0) * (0.5 * g.dt));
  const cplx out2 = std::exp(iu * cplx(p.delta0, 0.5 * p.gamma) * (0.5 * g.dt));

  // Per-row slab operator M(y) = Q(y) e_half Q(y)^dagger-inverse with
  // Q = diag(1, e^{i (kL1+kL2) y}, e^{i kL1 y}).  The two end cells get their
  // own matrices with couplings scaled by the covered fraction; the diagonal
  // retunings stay unscaled because they act outside the slab too.
  const SlabCells sc = slab_cells(g, p.slab_length);
  auto e_half_for = [&](double f) {
    Mat3 v = vbar;
    v(0, 2) *= f;
    v(2, 0) *= f;
    v(1, 2) *= f;
    v(2, 1) *= f;
    return exp3((-iu * (0.5 * g.dt)) * v);
  };
  const std::array<Mat3, 3> e_cells = {e_half_for(sc.f_lo), e_half, e_half_for(sc.f_hi)};
  std::array<std::vector<Mat3>, 3> slab_op;
  for (auto& ops : slab_op) ops.resize(g.ny);
  for (std::size_t iy = 0; iy < g.ny; ++iy) {
    const double y = g.y_min + static_cast<double>(iy) * g.dy;
    const std::array<cplx, 3> q = {cplx(1.0, 0.0), std::polar(1.0, (p.k_l1 + p.k_l2) * y),
                                   std::polar(1.0, p.k_l1 * y)};
    for (int e = 0; e < 3; ++e) {
      Mat3& m = slab_op[e][iy];
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) m(r, c) = q[r] * e_cells[e](r, c) * std::conj(q[c]);
    }
  }
  const bool coupled = p.omega1 * p.omega1 + p.omega2 * p.omega2 >= 1e-24 && sc.any;

  auto potential_half = [&]() {
    for (std::size_t iy = 0; iy < g.ny; ++iy) {
      cplx* b0 = st.buf[0].p + iy * g.nx;
      cplx* b1 = st.buf[1].p + iy * g.nx;
      cplx* b2 = st.buf[2].p + iy * g.nx;
      const Mat3& m_lo = slab_op[0][iy];
      const Mat3& m_mid = slab_op[1][iy];
      const Mat3& m_hi = slab_op[2][iy];
      for (std::size_t ix = 0; ix < g.nx; ++ix) {
        if (coupled && ix >= sc.lo && ix <= sc.hi) {
          const Mat3& m = ix == sc.lo ? m_lo : (ix == sc.hi ? m_hi : m_mid);
          const cplx v0 = b0[ix], v1 = b1[ix], v2 = b2[ix];
          b0[ix] = m(0, 0) * v0 + m(0, 1) * v1 + m(0, 2) * v2;
          b1[ix] = m(1, 0) * v0 + m(1, 1) * v1 + m(1, 2) * v2;
          b2[ix] = m(2, 0) * v0 + m(2, 1) * v1 + m(2, 2) * v2;
        } else {
          b1[ix] *= out1;
          b2[ix] *= out2;
        }
      }
    }
  };

  std::unique_ptr<SnapshotWriter> snap;
  if (!ov.snapshot_path.empty()) snap = std::make_unique<SnapshotWriter>(ov.snapshot_path);

  for (std::size_t step = 0; step < g.n_steps; ++step) {
    potential_half();
    st.kinetic_step();
    potential_half();
    st.absorb_step();
    if (snap && ov.snapshot_stride && (step + 1) % ov.snapshot_stride == 0) {
      const Field3 frame = st.to_field();
      snap->append(frame, g, static_cast<double>(step + 1) * g.dt);
    }
  }

  const Field3 final_field = st.to_field();
  if (ov.capture_final) *ov.capture_final = final_field;
  CentroidReport rep = extract_centroids(final_field, g, p.slab_length);
  rep.absorbed = st.absorbed;
  rep.t_final = static_cast<double>(g.n_steps) * g.dt;
  const double total = st.total_norm();
  rep.decayed = 1.0 - total - (st.absorbed[0] + st.absorbed[1] + st.absorbed[2]);

  // Ballistic back-propagation: each lobe's centroid runs backward along its
  // own measured velocity to the slab face; the intercept is compared with
  // the geometric ray through the launch centroid.
  const double x0 = resolve_x0(spec);
  const double y0 = (spec.center[0] == 0.0 && spec.center[1] == 0.0) ? x0 * std::tan(spec.theta)
                                                                     : spec.center[1];
  const double tan_th = std::tan(spec.theta);
  auto ray_y = [&](double x) { return y0 + tan_th * (x - x0); };
  const double x_max = g.x_min + static_cast<double>(g.nx - 1) * g.dx;
  FftBuf scratch(g.nx * g.ny);

  for (int s = 0; s < 3; ++s) {
    struct Candidate {
      double norm, shift;
    };
    auto measure = [&](const RegionStat& region, bool transmitted) {
      std::vector<Candidate> cands;
      if (!region.defined) return cands;
      const double face = transmitted ? p.slab_length : 0.0;
      const double rx_lo = transmitted ? p.slab_length : g.x_min - g.dx;
      const double rx_hi = transmitted ? x_max + g.dx : 0.0;
      std::vector<std::pair<std::size_t, std::size_t>> rows;
      if (region.split) {
        // Recover the y-runs from the lobe list by re-deriving them; the
        // stored lobes carry (norm, y) but not indices, so rebuild via the
        // marginal.  Cheap relative to one FFT.
        std::vector<double> marg(g.ny, 0.0);
        for (std::size_t iy = 0; iy < g.ny; ++iy)
          for (std::size_t ix = 0; ix < g.nx; ++ix) {
            const double x = g.x_min + static_cast<double>(ix) * g.dx;
            if (x <= rx_lo || x >= rx_hi) continue;
            marg[iy] += std::norm(final_field.comp[s][iy * g.nx + ix]) * g.dx * g.dy;
          }
        for (const auto& run : marginal_lobes(marg, g.y_min, g.dy)) rows.push_back({run.lo, run.hi});
      }
      if (rows.empty()) rows.push_back({0, g.ny - 1});
      for (const auto& [lo, hi] : rows) {
        const auto lv = lobe_velocity(st, s, rx_lo, rx_hi, lo, hi, scratch);
        if (!lv.ok) continue;
        if (transmitted ? !(lv.vx > 1e-6) : !(lv.vx < -1e-6)) continue;
        const double tau = (lv.centroid[0] - face) / lv.vx;
        const double y_face = lv.centroid[1] - lv.vy * tau;
        cands.push_back({lv.norm, y_face - ray_y(face)});
      }
      return cands;
    };

    auto pick_heaviest = [](const std::vector<Candidate>& cands) {
      double best_norm = -1.0, best = kNaN;
      for (const auto& c : cands)
        if (c.norm > best_norm) {
          best_norm = c.norm;
          best = c.shift;
        }
      return best;
    };

    const auto t_cands = measure(rep.transmitted[s], true);
    const double t_off = pick_heaviest(t_cands);
    if (!std::isnan(t_off)) {
      rep.D_t_excess[s] = t_off;
      rep.D_t[s] = t_off + tan_th * p.slab_length;
      if (rep.transmitted[s].split && rep.transmitted[s].lobes.size() == t_cands.size())
        for (std::size_t i = 0; i < t_cands.size(); ++i)
          rep.transmitted[s].lobes[i].shift = t_cands[i].shift + tan_th * p.slab_length;
    }
    const auto r_cands = measure(rep.reflected[s], false);
    const double r_off = pick_heaviest(r_cands);
    if (!std::isnan(r_off)) {
      rep.D_r[s] = r_off;
      if (rep.reflected[s].split && rep.reflected[s].lobes.size() == r_cands.size())
        for (std::size_t i = 0; i < r_cands.size(); ++i) rep.reflected[s].lobes[i].shift = r_cands[i].shift;
    }
  }

  check_absorber_budget(p, st.absorbed);
  return rep;
}

SnapshotWriter::SnapshotWriter(const std::string& path) {
  FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw Error(Errc::io_error, "cannot open snapshot file: " + path);
  stream_ = f;
}

SnapshotWriter::~SnapshotWriter() {
  if (stream_) std::fclose(static_cast<FILE*>(stream_));
}

void SnapshotWriter::append(const Field3& f, const GridSpec& g, double t) {
  FILE* fp = static_cast<FILE*>(stream_);
  const std::int64_t nx = static_cast<std::int64_t>(g.nx), ny = static_cast<std::int64_t>(g.ny);
  std::fwrite(&nx, sizeof nx, 1, fp);
  std::fwrite(&ny, sizeof ny, 1, fp);
  std::fwrite(&g.dx, sizeof g.dx, 1, fp);
  std::fwrite(&g.dy, sizeof g.dy, 1, fp);
  std::fwrite(&t, sizeof t, 1, fp);
  std::vector<double> row(g.nx);
  for (int s = 0; s < 3; ++s)
    for (std::size_t iy = 0; iy < g.ny; ++iy) {
      for (std::size_t ix = 0; ix < g.nx; ++ix) row[ix] = std::norm(f.comp[s][iy * g.nx + ix]);
      if (std::fwrite(row.data(), sizeof(double), g.nx, fp) != g.nx)
        throw Error(Errc::io_error, "snapshot write failed");
    }
  std::fflush(fp);
}

}  // namespace ghshift
