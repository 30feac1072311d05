#pragma once

// Counter-based random number generation (Philox4x32-10) with the scalar
// transforms the samplers need. Everything here is deterministic across
// platforms and compilers: the generator is pinned by known-answer vectors
// and the normal/gamma transforms are written out explicitly instead of
// relying on std::*_distribution, whose output is implementation-defined.
//
// A stream is addressed by (seed, stream_id); advancing the counter never
// touches other streams, so estimators can carve a sample budget into
// independent chunks and reproduce results regardless of thread count.

#include <array>
#include <cstdint>
#include <string_view>

namespace htw {

inline constexpr std::string_view kRngVersion = "philox4x32-10/v1";

struct RngState {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
};

class PhiloxRng {
 public:
  explicit PhiloxRng(RngState state) : state_(state) {}
  PhiloxRng(std::uint64_t seed, std::uint64_t stream_id = 0) : state_{seed, stream_id} {}

  RngState state() const { return state_; }

  // Raw 10-round Philox4x32 block function, exposed for known-answer tests.
  static std::array<std::uint32_t, 4> block(const std::array<std::uint32_t, 4>& counter,
                                            const std::array<std::uint32_t, 2>& key);

  std::uint32_t next_u32();
  std::uint64_t next_u64();

  // Uniform on the open interval (0, 1); never returns an endpoint, so it is
  // safe under log() and in Box-Muller.
  double uniform();

  // Standard normal via Box-Muller; generates pairs and caches the second.
  double normal();

  // Gamma(alpha, 1), alpha > 0. Marsaglia-Tsang squeeze for alpha >= 1 and
  // the boost trick Gamma(alpha) = Gamma(alpha + 1) * U^(1/alpha) below 1.
  double gamma(double alpha);

  // Chi-square with (possibly non-integer) dof > 0.
  double chi_square(double dof) { return 2.0 * gamma(0.5 * dof); }

 private:
  void refill();

  RngState state_;
  std::uint64_t block_index_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int buffer_pos_ = 4;  // empty
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace htw
