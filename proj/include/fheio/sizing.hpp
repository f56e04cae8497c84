#pragma once

#include <cstdint>
#include <string>

#include "fheio/errors.hpp"

namespace fheio {

// CKKS ring/modulus/decomposition parameters. Only the data-size arithmetic
// lives here; no modular arithmetic, NTT, or noise tracking.
struct CkksParams {
  std::uint64_t ring_degree_N = 0;  // coefficients per polynomial, power of two
  std::uint32_t log_q_bits = 0;     // total modulus width
  std::uint32_t prime_bits = 0;     // width of one CRT prime, <= 8*word_bytes
  std::uint32_t word_bytes = 8;     // storage bytes per residue coefficient
  std::uint32_t dnum = 1;           // key-switching decomposition number
  std::uint32_t aux_limbs_K = 0;    // auxiliary-modulus limbs in evaluation keys

  std::uint64_t slot_count() const { return ring_degree_N / 2; }

  void validate() const {
    if (ring_degree_N == 0 || (ring_degree_N & (ring_degree_N - 1)) != 0 ||
        ring_degree_N < 2)
      throw param_error("ring_degree_N must be a power of two >= 2");
    if (log_q_bits == 0) throw param_error("log_q_bits must be positive");
    if (prime_bits == 0) throw param_error("prime_bits must be positive");
    if (word_bytes == 0) throw param_error("word_bytes must be positive");
    if (prime_bits > 8u * word_bytes)
      throw param_error("prime_bits exceeds the machine word (8*word_bytes)");
    if (dnum == 0) throw param_error("dnum must be positive");
  }

  bool operator==(const CkksParams&) const = default;
};

namespace detail {

inline std::uint64_t mul_checked(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r = 0;
  if (__builtin_mul_overflow(a, b, &r))
    throw size_error("byte count overflows 64 bits");
  return r;
}

}  // namespace detail

// Number of residue polynomials (limbs) after CRT decomposition of Q.
inline std::uint64_t limb_count(const CkksParams& p) {
  p.validate();
  return (std::uint64_t(p.log_q_bits) + p.prime_bits - 1) / p.prime_bits;
}

// Bytes of one encoded polynomial: N coefficients x limbs x word size.
inline std::uint64_t poly_bytes(const CkksParams& p) {
  const std::uint64_t limbs = limb_count(p);
  return detail::mul_checked(detail::mul_checked(p.ring_degree_N, limbs),
                             p.word_bytes);
}

// A ciphertext is two polynomials of the plaintext's size.
inline std::uint64_t ciphertext_bytes(const CkksParams& p) {
  return detail::mul_checked(2, poly_bytes(p));
}

// One evaluation key: dnum ciphertext pairs over the extended modulus basis
// (limbs plus aux_limbs_K auxiliary limbs).
inline std::uint64_t evk_bytes(const CkksParams& p) {
  const std::uint64_t limbs = limb_count(p);
  std::uint64_t r = detail::mul_checked(std::uint64_t(p.dnum), 2);
  r = detail::mul_checked(r, p.ring_degree_N);
  r = detail::mul_checked(r, limbs + p.aux_limbs_K);
  return detail::mul_checked(r, p.word_bytes);
}

// A length-n message vector fits one plaintext iff N/2 >= n.
inline bool encode_fit(std::uint64_t message_len_n, const CkksParams& p) {
  p.validate();
  if (message_len_n == 0) throw param_error("message length must be positive");
  return p.slot_count() >= message_len_n;
}

}  // namespace fheio
