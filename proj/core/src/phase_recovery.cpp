#include "pslab/phase_recovery.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "pslab/parallel.hpp"

namespace pslab {
namespace {

// Nearest odd integer in [-max_odd, max_odd], applied per axis on the
// square-grid alphabets. Agrees with the exhaustive scan everywhere except on
// exact decision boundaries, which have measure zero for noisy inputs.
inline double round_odd_clamped(double x, double max_odd) {
  double y = 2.0 * std::floor(0.5 * x) + 1.0;
  if (y > max_odd) y = max_odd;
  if (y < -max_odd) y = -max_odd;
  return y;
}

struct FastDecider {
  enum class Kind { generic, square, cross32 };
  Kind kind = Kind::generic;
  double max_odd = 0.0;
  const Constellation* constellation = nullptr;

  explicit FastDecider(const Constellation& c) : constellation(&c) {
    if (c.family() == "square") {
      kind = Kind::square;
      max_odd = std::sqrt(static_cast<double>(c.order())) - 1.0;
    } else if (c.family() == "cross32") {
      kind = Kind::cross32;
      max_odd = 5.0;
    }
  }

  Complex operator()(Complex w) const {
    switch (kind) {
      case Kind::square:
        return {round_odd_clamped(w.real(), max_odd), round_odd_clamped(w.imag(), max_odd)};
      case Kind::cross32: {
        const double a = round_odd_clamped(w.real(), 5.0);
        const double b = round_odd_clamped(w.imag(), 5.0);
        if (std::abs(a) == 5.0 && std::abs(b) == 5.0) {
          // Pruned corner: the nearest retained point is one of its two
          // in-grid neighbours.
          const Complex c1(a > 0.0 ? 3.0 : -3.0, b);
          const Complex c2(a, b > 0.0 ? 3.0 : -3.0);
          return std::norm(w - c1) <= std::norm(w - c2) ? c1 : c2;
        }
        return {a, b};
      }
      case Kind::generic:
      default:
        return decide(w, *constellation);
    }
  }
};

std::size_t argmin_first(const std::vector<double>& values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] < values[best]) best = i;
  return best;
}

// Centered window around symbol i: [i - (N-1)/2, i + N/2], truncated at the
// sequence edges.
inline void window_bounds(std::size_t i, std::size_t n, std::size_t len, std::size_t& lo,
                          std::size_t& hi) {
  const std::size_t half_lo = (n - 1) / 2;
  lo = i > half_lo ? i - half_lo : 0;
  hi = std::min(len - 1, i + n / 2);
}

// Supervised costs reduce to J(b) = K - 2 Re(Z e^{-j theta_b}) with
// Z = sum r_i conj(t_i) and K = sum (|r_i|^2 + |t_i|^2), so a window costs
// O(N + B) instead of O(N*B). Every grid phase is still evaluated.
void run_block_sps(std::span<const Complex> received, std::span<const Complex> transmitted,
                   std::span<const double> grid, std::size_t window, int threads,
                   RecoveryResult& out) {
  const std::size_t blocks = received.size() / window;
  const std::size_t nb = grid.size();
  std::vector<double> cos_b(nb), sin_b(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    cos_b[b] = std::cos(grid[b]);
    sin_b[b] = std::sin(grid[b]);
  }

  const std::size_t chunk = std::max<std::size_t>(1, 65536 / window);
  const std::size_t n_chunks = (blocks + chunk - 1) / chunk;
  parallel_for(n_chunks, threads, [&](std::size_t c) {
    const std::size_t lo = c * chunk, hi = std::min(blocks, lo + chunk);
    for (std::size_t blk = lo; blk < hi; ++blk) {
      Complex z{0.0, 0.0};
      double k = 0.0;
      const std::size_t base = blk * window;
      for (std::size_t i = 0; i < window; ++i) {
        z += received[base + i] * std::conj(transmitted[base + i]);
        k += std::norm(received[base + i]) + std::norm(transmitted[base + i]);
      }
      std::size_t best = 0;
      double best_j = 0.0;
      for (std::size_t b = 0; b < nb; ++b) {
        const double j = k - 2.0 * (z.real() * cos_b[b] + z.imag() * sin_b[b]);
        if (b == 0 || j < best_j) {
          best_j = j;
          best = b;
        }
      }
      out.estimates[blk] = grid[best];
      out.cost_min[blk] = best_j;
    }
  });
}

void run_block_bps(std::span<const Complex> received, const Constellation& constellation,
                   std::span<const double> grid, std::size_t window, int threads,
                   RecoveryResult& out) {
  const std::size_t blocks = received.size() / window;
  const std::size_t nb = grid.size();
  std::vector<Complex> rotor(nb);
  for (std::size_t b = 0; b < nb; ++b) rotor[b] = std::polar(1.0, -grid[b]);
  const FastDecider dec(constellation);

  const std::size_t chunk = std::max<std::size_t>(1, 65536 / window);
  const std::size_t n_chunks = (blocks + chunk - 1) / chunk;
  parallel_for(n_chunks, threads, [&](std::size_t c) {
    std::vector<double> j(nb);
    const std::size_t lo = c * chunk, hi = std::min(blocks, lo + chunk);
    for (std::size_t blk = lo; blk < hi; ++blk) {
      std::fill(j.begin(), j.end(), 0.0);
      const std::size_t base = blk * window;
      for (std::size_t i = 0; i < window; ++i) {
        const Complex r = received[base + i];
        for (std::size_t b = 0; b < nb; ++b) {
          const Complex w = r * rotor[b];
          j[b] += std::norm(w - dec(w));
        }
      }
      const std::size_t best = argmin_first(j);
      out.estimates[blk] = grid[best];
      out.cost_min[blk] = j[best];
    }
  });
}

void run_sliding_sps(std::span<const Complex> received, std::span<const Complex> transmitted,
                     std::span<const double> grid, std::size_t window, int threads,
                     RecoveryResult& out) {
  const std::size_t len = received.size();
  const std::size_t nb = grid.size();
  std::vector<double> cos_b(nb), sin_b(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    cos_b[b] = std::cos(grid[b]);
    sin_b[b] = std::sin(grid[b]);
  }

  std::vector<Complex> zp(len + 1, Complex{0.0, 0.0});
  std::vector<double> kp(len + 1, 0.0);
  for (std::size_t i = 0; i < len; ++i) {
    zp[i + 1] = zp[i] + received[i] * std::conj(transmitted[i]);
    kp[i + 1] = kp[i] + std::norm(received[i]) + std::norm(transmitted[i]);
  }

  constexpr std::size_t kChunk = 8192;
  const std::size_t n_chunks = (len + kChunk - 1) / kChunk;
  parallel_for(n_chunks, threads, [&](std::size_t c) {
    const std::size_t i_lo = c * kChunk, i_hi = std::min(len, i_lo + kChunk);
    for (std::size_t i = i_lo; i < i_hi; ++i) {
      std::size_t lo, hi;
      window_bounds(i, window, len, lo, hi);
      const Complex z = zp[hi + 1] - zp[lo];
      const double k = kp[hi + 1] - kp[lo];
      std::size_t best = 0;
      double best_j = 0.0;
      for (std::size_t b = 0; b < nb; ++b) {
        const double j = k - 2.0 * (z.real() * cos_b[b] + z.imag() * sin_b[b]);
        if (b == 0 || j < best_j) {
          best_j = j;
          best = b;
        }
      }
      out.estimates[i] = grid[best];
      out.cost_min[i] = best_j;
    }
  });
}

// Blind sliding mode. The per-symbol distance term d(i, b) does not depend on
// the window, so prefix sums over a chunk-local slice turn each window cost
// into one subtraction per phase. Chunk boundaries are fixed constants, which
// keeps results identical across thread counts.
void run_sliding_bps(std::span<const Complex> received, const Constellation& constellation,
                     std::span<const double> grid, std::size_t window, int threads,
                     RecoveryResult& out) {
  const std::size_t len = received.size();
  const std::size_t nb = grid.size();
  std::vector<Complex> rotor(nb);
  for (std::size_t b = 0; b < nb; ++b) rotor[b] = std::polar(1.0, -grid[b]);
  const FastDecider dec(constellation);

  constexpr std::size_t kChunk = 4096;
  const std::size_t n_chunks = (len + kChunk - 1) / kChunk;
  parallel_for(n_chunks, threads, [&](std::size_t c) {
    const std::size_t i_lo = c * kChunk, i_hi = std::min(len, i_lo + kChunk);
    std::size_t t_lo, t_hi;  // symbol range feeding any window in this chunk
    window_bounds(i_lo, window, len, t_lo, t_hi);
    std::size_t last_lo, last_hi;
    window_bounds(i_hi - 1, window, len, last_lo, last_hi);
    t_hi = last_hi;

    const std::size_t slice = t_hi - t_lo + 1;
    std::vector<double> prefix((slice + 1) * nb, 0.0);
    for (std::size_t k = 0; k < slice; ++k) {
      const Complex r = received[t_lo + k];
      double* row = prefix.data() + (k + 1) * nb;
      const double* prev = prefix.data() + k * nb;
      for (std::size_t b = 0; b < nb; ++b) {
        const Complex w = r * rotor[b];
        row[b] = prev[b] + std::norm(w - dec(w));
      }
    }

    for (std::size_t i = i_lo; i < i_hi; ++i) {
      std::size_t lo, hi;
      window_bounds(i, window, len, lo, hi);
      const double* top = prefix.data() + (hi - t_lo + 1) * nb;
      const double* bot = prefix.data() + (lo - t_lo) * nb;
      std::size_t best = 0;
      double best_j = 0.0;
      for (std::size_t b = 0; b < nb; ++b) {
        const double j = top[b] - bot[b];
        if (b == 0 || j < best_j) {
          best_j = j;
          best = b;
        }
      }
      out.estimates[i] = grid[best];
      out.cost_min[i] = best_j;
    }
  });
}

}  // namespace

std::vector<double> test_phase_grid(int count, double sector_offset) {
  if (count < 2) throw std::invalid_argument("test_phase_grid: need at least 2 phases");
  const double step = (kPi / 2.0) / count;
  std::vector<double> grid(count);
  for (int b = 0; b < count; ++b) grid[b] = -kPi / 4.0 + sector_offset + (b + 0.5) * step;
  return grid;
}

std::size_t decide_index(Complex symbol, const Constellation& constellation) {
  const auto points = constellation.points();
  std::size_t best = 0;
  double best_d = std::norm(symbol - points[0]);
  for (std::size_t m = 1; m < points.size(); ++m) {
    const double d = std::norm(symbol - points[m]);
    if (d < best_d) {
      best_d = d;
      best = m;
    }
  }
  return best;
}

Complex decide(Complex symbol, const Constellation& constellation) {
  return constellation.points()[decide_index(symbol, constellation)];
}

Complex decide_fast(Complex symbol, const Constellation& constellation) {
  return FastDecider(constellation)(symbol);
}

double window_estimate(std::span<const Complex> window, std::span<const Complex> known,
                       std::span<const double> grid, double* cost_min) {
  if (window.empty()) throw std::invalid_argument("window_estimate: empty window");
  if (window.size() != known.size())
    throw std::invalid_argument("window_estimate: window/reference length mismatch");

  std::size_t best = 0;
  double best_j = 0.0;
  for (std::size_t b = 0; b < grid.size(); ++b) {
    const Complex rotor = std::polar(1.0, -grid[b]);
    double j = 0.0;
    for (std::size_t i = 0; i < window.size(); ++i) j += std::norm(window[i] * rotor - known[i]);
    if (b == 0 || j < best_j) {
      best_j = j;
      best = b;
    }
  }
  if (cost_min) *cost_min = best_j;
  return grid[best];
}

double window_estimate(std::span<const Complex> window, const Constellation& constellation,
                       std::span<const double> grid, double* cost_min) {
  if (window.empty()) throw std::invalid_argument("window_estimate: empty window");

  std::size_t best = 0;
  double best_j = 0.0;
  for (std::size_t b = 0; b < grid.size(); ++b) {
    const Complex rotor = std::polar(1.0, -grid[b]);
    double j = 0.0;
    for (std::size_t i = 0; i < window.size(); ++i) {
      const Complex w = window[i] * rotor;
      j += std::norm(w - decide(w, constellation));
    }
    if (b == 0 || j < best_j) {
      best_j = j;
      best = b;
    }
  }
  if (cost_min) *cost_min = best_j;
  return grid[best];
}

RecoveryResult run_recovery(std::span<const Complex> received,
                            std::span<const Complex> transmitted,
                            const Constellation& constellation, const RecoveryConfig& config) {
  const std::size_t len = received.size();
  if (len == 0) throw std::invalid_argument("run_recovery: empty input");
  if (config.window < 1) throw std::invalid_argument("run_recovery: window must be >= 1");
  const auto window = static_cast<std::size_t>(config.window);

  const bool supervised = config.mode == Mode::sps;
  if (supervised && transmitted.empty())
    throw std::invalid_argument("run_recovery: SPS requires the transmitted sequence");
  if (!transmitted.empty() && transmitted.size() != len)
    throw std::invalid_argument("run_recovery: transmitted length mismatch");

  const auto grid = test_phase_grid(config.test_phases, config.sector_offset);

  RecoveryResult out;
  if (config.windowing == Windowing::block) {
    if (window > len)
      throw std::invalid_argument("run_recovery: block window exceeds sequence length");
    const std::size_t blocks = len / window;
    out.estimates.resize(blocks);
    out.cost_min.resize(blocks);
    if (supervised)
      run_block_sps(received, transmitted, grid, window, config.threads, out);
    else
      run_block_bps(received, constellation, grid, window, config.threads, out);

    out.corrected.resize(blocks * window);
    for (std::size_t blk = 0; blk < blocks; ++blk) {
      const Complex derot = std::polar(1.0, -out.estimates[blk]);
      for (std::size_t i = 0; i < window; ++i)
        out.corrected[blk * window + i] = received[blk * window + i] * derot;
    }
  } else {
    out.estimates.resize(len);
    out.cost_min.resize(len);
    if (supervised)
      run_sliding_sps(received, transmitted, grid, window, config.threads, out);
    else
      run_sliding_bps(received, constellation, grid, window, config.threads, out);

    out.corrected.resize(len);
    for (std::size_t i = 0; i < len; ++i)
      out.corrected[i] = received[i] * std::polar(1.0, -out.estimates[i]);
  }

  if (!supervised) {
    const FastDecider dec(constellation);
    out.decisions.resize(out.corrected.size());
    for (std::size_t i = 0; i < out.corrected.size(); ++i)
      out.decisions[i] = dec(out.corrected[i]);
  }
  return out;
}

std::vector<Complex> supervised_cycle_slip_correct(std::span<const Complex> corrected,
                                                   std::span<const Complex> transmitted) {
  if (corrected.size() != transmitted.size())
    throw std::invalid_argument("supervised_cycle_slip_correct: length mismatch");

  std::vector<Complex> out(corrected.size());
  for (std::size_t i = 0; i < corrected.size(); ++i) {
    const Complex c = corrected[i];
    // Rotations by k*pi/2 are exact component swaps, so ties are exact too.
    const Complex candidates[4] = {c, {-c.imag(), c.real()}, {-c.real(), -c.imag()},
                                   {c.imag(), -c.real()}};
    int best = 0;
    double best_d = std::norm(candidates[0] - transmitted[i]);
    for (int k = 1; k < 4; ++k) {
      const double d = std::norm(candidates[k] - transmitted[i]);
      if (d < best_d) {
        best_d = d;
        best = k;
      }
    }
    out[i] = candidates[best];
  }
  return out;
}

void dump_recovery_csv(const RecoveryResult& result, std::ostream& os) {
  os << "index,estimate,j_min\n";
  char line[96];
  for (std::size_t i = 0; i < result.estimates.size(); ++i) {
    std::snprintf(line, sizeof line, "%zu,%.12g,%.12g\n", i, result.estimates[i],
                  result.cost_min[i]);
    os << line;
  }
}

}  // namespace pslab
