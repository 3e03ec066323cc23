/*
   Copyright 2026 The degsde Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#include "degsde/rng_paths.hpp"

#include "degsde/error.hpp"

#include <cmath>
#include <numbers>

namespace degsde {
namespace {

constexpr std::uint32_t kMulA = 0xD2511F53u;
constexpr std::uint32_t kMulB = 0xCD9E8D57u;
constexpr std::uint32_t kWeylA = 0x9E3779B9u;
constexpr std::uint32_t kWeylB = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

// 53 random bits mapped to the open unit interval.
inline double to_open_unit(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

} // namespace

CounterRng::CounterRng(SeedId seed, Lane lane) noexcept
    : key_{static_cast<std::uint32_t>(seed.master_seed),
           static_cast<std::uint32_t>(seed.master_seed >> 32)},
      lane_bits_(static_cast<std::uint32_t>(lane) << 24),
      path_lo_(static_cast<std::uint32_t>(seed.path_index)),
      path_hi_(static_cast<std::uint32_t>(seed.path_index >> 32)) {}

CounterRng::Block CounterRng::block(std::uint64_t index) const noexcept {
    Block c{static_cast<std::uint32_t>(index),
            (static_cast<std::uint32_t>(index >> 32) & 0x00FFFFFFu) | lane_bits_, path_lo_,
            path_hi_};
    std::uint32_t k0 = key_[0];
    std::uint32_t k1 = key_[1];
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMulA, c[0], hi0, lo0);
        mulhilo(kMulB, c[2], hi1, lo1);
        c = {hi1 ^ c[1] ^ k0, lo1, hi0 ^ c[3] ^ k1, lo0};
        k0 += kWeylA;
        k1 += kWeylB;
    }
    return c;
}

std::pair<double, double> NormalStream::pair_at(std::uint64_t block) const noexcept {
    const auto b = rng_.block(block);
    const double u1 = to_open_unit(b[0], b[1]);
    const double u2 = to_open_unit(b[2], b[3]);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(theta), r * std::sin(theta)};
}

double NormalStream::operator()() noexcept {
    const std::uint64_t k = next_++;
    const std::uint64_t blk = k >> 1;
    if (blk != cached_block_) {
        cached_ = pair_at(blk);
        cached_block_ = blk;
    }
    return (k & 1u) ? cached_.second : cached_.first;
}

double NormalStream::at(std::uint64_t k) const noexcept {
    const auto p = pair_at(k >> 1);
    return (k & 1u) ? p.second : p.first;
}

void NormalStream::seek(std::uint64_t k) noexcept { next_ = k; }

double UniformStream::operator()() noexcept { return at(next_++); }

double UniformStream::at(std::uint64_t k) const noexcept {
    const auto b = rng_.block(k >> 1);
    return (k & 1u) ? to_open_unit(b[2], b[3]) : to_open_unit(b[0], b[1]);
}

std::vector<double> BrownianPath::values() const {
    std::vector<double> w(increments.size() + 1);
    w[0] = w0;
    for (std::size_t k = 0; k < increments.size(); ++k) w[k + 1] = w[k] + increments[k];
    return w;
}

void BrownianPath::extend(std::size_t more) {
    NormalStream stream(seed, Lane::driving);
    stream.seek(increments.size());
    const double sd = std::sqrt(dt);
    increments.reserve(increments.size() + more);
    for (std::size_t k = 0; k < more; ++k) increments.push_back(sd * stream());
}

BrownianPath gen_path(SeedId seed, std::size_t n, double dt, double w0) {
    if (n < 1) throw ParameterError("gen_path: step count must be >= 1");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ParameterError("gen_path: dt must be positive");
    BrownianPath path{dt, {}, w0, seed};
    path.extend(n);
    return path;
}

std::vector<double> coarsen(std::span<const double> fine, std::size_t factor) {
    if (factor == 0 || fine.size() % factor != 0)
        throw ParameterError("coarsen: fine length must be a multiple of the factor");
    std::vector<double> out(fine.size() / factor, 0.0);
    for (std::size_t i = 0; i < out.size(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < factor; ++j) s += fine[i * factor + j];
        out[i] = s;
    }
    return out;
}

double bridge_crossing_prob(double w_left, double w_right, double dt, double level, double sigma) {
    if (!(dt > 0.0)) throw ParameterError("bridge_crossing_prob: dt must be positive");
    const double a = w_left - level;
    const double b = w_right - level;
    if (a * b <= 0.0) return 1.0;
    const double var = sigma * sigma * dt;
    if (!(var > 0.0)) return 0.0;
    return std::exp(-2.0 * a * b / var);
}

std::pair<double, double> bridge_split(double h, double dw, double z) noexcept {
    const double first = 0.5 * dw + 0.5 * std::sqrt(h) * z;
    return {first, dw - first};
}

} // namespace degsde
