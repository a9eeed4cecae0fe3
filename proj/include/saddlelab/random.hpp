// Copyright 2026 The saddlelab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace saddlelab {

/// Philox4x64-10 block function (Salmon et al., "Parallel random numbers:
/// as easy as 1, 2, 3"). Maps a 256-bit counter and a 128-bit key to 256
/// pseudo-random bits.
inline std::array<std::uint64_t, 4> philox4x64(std::array<std::uint64_t, 4> ctr,
                                               std::array<std::uint64_t, 2> key) {
  constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ULL;
  constexpr std::uint64_t kMul1 = 0xCA5A826395121157ULL;
  constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
  constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;
  for (int round = 0; round < 10; ++round) {
    const unsigned __int128 p0 = static_cast<unsigned __int128>(kMul0) * ctr[0];
    const unsigned __int128 p1 = static_cast<unsigned __int128>(kMul1) * ctr[2];
    const auto hi0 = static_cast<std::uint64_t>(p0 >> 64);
    const auto lo0 = static_cast<std::uint64_t>(p0);
    const auto hi1 = static_cast<std::uint64_t>(p1 >> 64);
    const auto lo1 = static_cast<std::uint64_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

/// A reproducible random stream for one trial.
///
/// The stream is keyed by (master seed, stream id) and walks the Philox
/// counter from 1 upward; word k of the stream is word k % 4 of block
/// k / 4 + 1. Distinct stream ids therefore never share a block, and the
/// n-th raw value of a stream is independent of how other streams are
/// consumed. Draw budgets:
///   next_u64 / uniform01 / uniform_index: 1 raw value,
///   normal_pair: 2 raw values (Box-Muller).
class RandomStream {
 public:
  RandomStream(std::uint64_t master_seed, std::uint64_t stream_id)
      : key_{master_seed, stream_id} {}

  std::uint64_t next_u64() {
    if (slot_ == 4) {
      ++block_;
      buffer_ = philox4x64({block_, 0, 0, 0}, key_);
      slot_ = 0;
    }
    ++consumed_;
    return buffer_[slot_++];
  }

  /// Uniform on the open interval (0, 1), 53 bits of resolution.
  double uniform01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n) by 128-bit multiply-shift.
  std::uint64_t uniform_index(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  /// Two independent standard normals from two raw values.
  std::array<double, 2> normal_pair() {
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    return {radius * std::cos(angle), radius * std::sin(angle)};
  }

  std::uint64_t consumed() const { return consumed_; }

 private:
  std::array<std::uint64_t, 2> key_;
  std::array<std::uint64_t, 4> buffer_{};
  std::uint64_t block_ = 0;
  std::uint64_t consumed_ = 0;
  int slot_ = 4;
};

}  // namespace saddlelab
