#ifndef BSNN_PRNG_HPP_
#define BSNN_PRNG_HPP_

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

// Hardware-faithful random byte sources. The LFSR bank models the
// accelerator's PRNG block: 16 independent 32-bit Galois LFSRs, four
// bytes tapped from each word so 64 bytes come out per clock. The
// software schemes (fp32 uniform, 8-bit randint) use a splitmix64
// counter generator so streams are reproducible across implementations.

namespace bsnn {

enum class RngScheme { Fp32Uniform, Fxp8Randint, LfsrNoReuse, LfsrMaxReuse };

inline const char* rng_scheme_name(RngScheme s) {
  switch (s) {
    case RngScheme::Fp32Uniform: return "fp32";
    case RngScheme::Fxp8Randint: return "fxp8";
    case RngScheme::LfsrNoReuse: return "lfsr-noreuse";
    case RngScheme::LfsrMaxReuse: return "lfsr-maxreuse";
  }
  return "?";
}

inline RngScheme rng_scheme_from_name(const std::string& name) {
  if (name == "fp32") return RngScheme::Fp32Uniform;
  if (name == "fxp8") return RngScheme::Fxp8Randint;
  if (name == "lfsr-noreuse") return RngScheme::LfsrNoReuse;
  if (name == "lfsr-maxreuse") return RngScheme::LfsrMaxReuse;
  throw std::invalid_argument("unknown rng scheme: " + name);
}

inline uint64_t splitmix64(uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Derive an independent substream seed (MC members, samples, data gen).
inline uint64_t derive_seed(uint64_t master, uint64_t stream_id) {
  uint64_t s = master ^ (0xA0761D6478BD642Full * (stream_id + 1));
  return splitmix64(s);
}

struct LfsrState {
  uint32_t word = 1;
};

// Galois form, polynomial x^32 + x^22 + x^2 + x + 1 (maximal length).
// Shift left; on carry-out xor the low-degree coefficients.
inline constexpr uint32_t kLfsr32FeedbackMask = 0x00400007u;

inline uint32_t lfsr_step(uint32_t word) {
  if (word == 0) {
    throw std::domain_error("lfsr_step: zero state");
  }
  uint32_t carry = word >> 31;
  word <<= 1;
  if (carry) word ^= kLfsr32FeedbackMask;
  return word;
}

// 8-bit test variant, x^8 + x^6 + x^5 + x^4 + 1, full period 255.
inline constexpr uint8_t kLfsr8FeedbackMask = 0x71u;

inline uint8_t lfsr8_step(uint8_t word) {
  if (word == 0) {
    throw std::domain_error("lfsr8_step: zero state");
  }
  uint8_t carry = word >> 7;
  word = static_cast<uint8_t>(word << 1);
  if (carry) word ^= kLfsr8FeedbackMask;
  return word;
}

struct LfsrBank {
  std::vector<uint32_t> states;
  uint64_t master_seed = 0;

  int size() const { return static_cast<int>(states.size()); }
};

// k nonzero, pairwise distinct states from a splitmix expansion of the seed.
inline LfsrBank bank_init(uint64_t master_seed, int k = 16) {
  if (k < 1) {
    throw std::invalid_argument("bank_init: k must be >= 1");
  }
  LfsrBank bank;
  bank.master_seed = master_seed;
  bank.states.reserve(k);
  uint64_t state = master_seed;
  while (static_cast<int>(bank.states.size()) < k) {
    uint32_t candidate = static_cast<uint32_t>(splitmix64(state));
    if (candidate == 0) continue;
    bool dup = false;
    for (uint32_t s : bank.states) {
      if (s == candidate) { dup = true; break; }
    }
    if (!dup) bank.states.push_back(candidate);
  }
  return bank;
}

// One clock of the PRNG block: every LFSR steps once, the four bytes of
// each word are emitted LSB-first in bank order.
inline std::array<uint8_t, 64> bank_draw64(LfsrBank& bank) {
  if (bank.size() != 16) {
    throw std::invalid_argument("bank_draw64: bank must hold 16 LFSRs");
  }
  std::array<uint8_t, 64> out;
  for (int i = 0; i < 16; ++i) {
    uint32_t w = lfsr_step(bank.states[i]);
    bank.states[i] = w;
    out[4 * i + 0] = static_cast<uint8_t>(w);
    out[4 * i + 1] = static_cast<uint8_t>(w >> 8);
    out[4 * i + 2] = static_cast<uint8_t>(w >> 16);
    out[4 * i + 3] = static_cast<uint8_t>(w >> 24);
  }
  return out;
}

// splitmix64 in counter mode; i.i.d. across counter values.
struct CounterRng {
  uint64_t seed = 0;
  uint64_t counter = 0;

  uint64_t next_u64() {
    uint64_t s = seed + (++counter) * 0x9E3779B97F4A7C15ull;
    uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
  // Uniform in [0, 1), 53 bits.
  double next_real() { return (next_u64() >> 11) * 0x1.0p-53; }
  // Truncated to the top 8 bits.
  uint8_t next_byte() { return static_cast<uint8_t>(next_u64() >> 56); }
};

// Unified per-scheme stream. LfsrMaxReuse serves bytes from bank_draw64
// blocks; LfsrNoReuse steps round-robin through the bank taking one low
// byte per step.
class RngStream {
 public:
  RngStream(RngScheme scheme, uint64_t seed, int k = 16)
      : scheme_(scheme), crng_{seed, 0}, bank_(bank_init(seed, k)) {}

  RngScheme scheme() const { return scheme_; }

  uint8_t next_byte() {
    switch (scheme_) {
      case RngScheme::Fxp8Randint:
        return crng_.next_byte();
      case RngScheme::LfsrNoReuse: {
        int i = round_robin_++ % bank_.size();
        bank_.states[i] = lfsr_step(bank_.states[i]);
        return static_cast<uint8_t>(bank_.states[i]);
      }
      case RngScheme::LfsrMaxReuse: {
        if (block_pos_ == 64) {
          block_ = bank_draw64(bank_);
          block_pos_ = 0;
        }
        return block_[block_pos_++];
      }
      case RngScheme::Fp32Uniform:
        throw std::logic_error("next_byte on fp32 scheme");
    }
    throw std::logic_error("unreachable");
  }

  double next_real() {
    if (scheme_ != RngScheme::Fp32Uniform) {
      throw std::logic_error("next_real on 8-bit scheme");
    }
    return crng_.next_real();
  }

  LfsrBank& bank() { return bank_; }

 private:
  RngScheme scheme_;
  CounterRng crng_;
  LfsrBank bank_;
  int round_robin_ = 0;
  std::array<uint8_t, 64> block_{};
  int block_pos_ = 64;
};

inline std::vector<uint8_t> draw_bytes(RngStream& s, size_t n) {
  std::vector<uint8_t> out(n);
  for (auto& b : out) b = s.next_byte();
  return out;
}

inline std::vector<double> draw_reals(RngStream& s, size_t n) {
  std::vector<double> out(n);
  for (auto& r : out) r = s.next_real();
  return out;
}

}  // namespace bsnn

#endif  // BSNN_PRNG_HPP_
