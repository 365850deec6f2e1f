#pragma once

#include <cassert>
#include <cstdint>
#include <cstring>
#include <memory>
#include <utility>

namespace relpol {

// Fixed-size bit set over an object universe. Universes of at most 64
// objects (the common case everywhere in this codebase) live inline and
// never touch the heap.
class Bits {
 public:
  Bits() : nbits_(0), inline_(0) {}

  explicit Bits(uint32_t nbits) : nbits_(nbits), inline_(0) {
    if (words() > 1) {
      ext_ = std::make_unique<uint64_t[]>(words());
      std::memset(ext_.get(), 0, words() * 8);
    }
  }

  Bits(const Bits& o) : nbits_(o.nbits_), inline_(o.inline_) {
    if (o.ext_) {
      ext_ = std::make_unique<uint64_t[]>(words());
      std::memcpy(ext_.get(), o.ext_.get(), words() * 8);
    }
  }
  Bits(Bits&&) noexcept = default;
  Bits& operator=(const Bits& o) {
    if (this != &o) *this = Bits(o);
    return *this;
  }
  Bits& operator=(Bits&&) noexcept = default;

  uint32_t size() const { return nbits_; }
  uint32_t words() const { return (nbits_ + 63) / 64; }

  uint64_t* data() { return ext_ ? ext_.get() : &inline_; }
  const uint64_t* data() const { return ext_ ? ext_.get() : &inline_; }

  void set(uint32_t i) {
    assert(i < nbits_);
    data()[i >> 6] |= uint64_t(1) << (i & 63);
  }
  void reset(uint32_t i) {
    assert(i < nbits_);
    data()[i >> 6] &= ~(uint64_t(1) << (i & 63));
  }
  bool test(uint32_t i) const {
    assert(i < nbits_);
    return (data()[i >> 6] >> (i & 63)) & 1;
  }

  void set_all() {
    for (uint32_t w = 0; w < words(); ++w) data()[w] = ~uint64_t(0);
    trim();
  }
  void clear() {
    for (uint32_t w = 0; w < words(); ++w) data()[w] = 0;
  }

  Bits& operator&=(const Bits& o) {
    assert(nbits_ == o.nbits_);
    for (uint32_t w = 0; w < words(); ++w) data()[w] &= o.data()[w];
    return *this;
  }
  Bits& operator|=(const Bits& o) {
    assert(nbits_ == o.nbits_);
    for (uint32_t w = 0; w < words(); ++w) data()[w] |= o.data()[w];
    return *this;
  }
  // this := this & ~o
  Bits& subtract(const Bits& o) {
    assert(nbits_ == o.nbits_);
    for (uint32_t w = 0; w < words(); ++w) data()[w] &= ~o.data()[w];
    return *this;
  }
  Bits complement() const {
    Bits r(*this);
    for (uint32_t w = 0; w < r.words(); ++w) r.data()[w] = ~r.data()[w];
    r.trim();
    return r;
  }

  uint32_t count() const {
    uint32_t c = 0;
    for (uint32_t w = 0; w < words(); ++w)
      c += static_cast<uint32_t>(__builtin_popcountll(data()[w]));
    return c;
  }
  bool any() const {
    for (uint32_t w = 0; w < words(); ++w)
      if (data()[w]) return true;
    return false;
  }
  bool none() const { return !any(); }

  bool intersects(const Bits& o) const {
    assert(nbits_ == o.nbits_);
    for (uint32_t w = 0; w < words(); ++w)
      if (data()[w] & o.data()[w]) return true;
    return false;
  }
  bool is_subset_of(const Bits& o) const {
    assert(nbits_ == o.nbits_);
    for (uint32_t w = 0; w < words(); ++w)
      if (data()[w] & ~o.data()[w]) return false;
    return true;
  }

  // Lowest set bit, or size() if empty.
  uint32_t first_set() const {
    for (uint32_t w = 0; w < words(); ++w)
      if (data()[w]) return w * 64 + static_cast<uint32_t>(__builtin_ctzll(data()[w]));
    return nbits_;
  }

  template <typename F>
  void for_each_set(F&& f) const {
    for (uint32_t w = 0; w < words(); ++w) {
      uint64_t m = data()[w];
      while (m) {
        uint32_t b = static_cast<uint32_t>(__builtin_ctzll(m));
        f(w * 64 + b);
        m &= m - 1;
      }
    }
  }

  friend bool operator==(const Bits& a, const Bits& b) {
    if (a.nbits_ != b.nbits_) return false;
    for (uint32_t w = 0; w < a.words(); ++w)
      if (a.data()[w] != b.data()[w]) return false;
    return true;
  }

 private:
  // Keep bits past nbits_ zero so count()/equality stay honest.
  void trim() {
    if (nbits_ == 0) return;
    uint32_t rem = nbits_ & 63;
    if (rem) data()[words() - 1] &= (~uint64_t(0)) >> (64 - rem);
  }

  uint32_t nbits_;
  uint64_t inline_;
  std::unique_ptr<uint64_t[]> ext_;
};

}  // namespace relpol
