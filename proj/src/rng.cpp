#include "qrotor/rng.hpp"

namespace qrotor {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

namespace {
std::uint64_t mix_key(std::uint64_t key, std::uint64_t k) {
  return splitmix64(key ^ splitmix64(k + 0x632be59bd9b4e019ULL));
}
}  // namespace

RngStream::RngStream(std::uint64_t seed, std::initializer_list<std::uint64_t> keys)
    : key_(splitmix64(seed)) {
  for (auto k : keys) key_ = mix_key(key_, k);
}

RngStream::result_type RngStream::operator()() {
  // Two rounds over (key, counter) decorrelate adjacent counters well enough
  // for Monte Carlo use.
  return splitmix64(splitmix64(key_ ^ (counter_++ * 0xd1342543de82ef95ULL)) + key_);
}

double RngStream::uniform() { return double((*this)() >> 11) * 0x1.0p-53; }

double RngStream::normal() { return gauss_(*this); }

std::uint64_t RngStream::below(std::uint64_t n) {
  if (n <= 1) return 0;
  const std::uint64_t limit = max() - max() % n;
  std::uint64_t v;
  do v = (*this)();
  while (v >= limit);
  return v % n;
}

RngStream RngStream::substream(std::uint64_t key) const {
  RngStream child(*this);
  child.key_ = mix_key(key_, key);
  child.counter_ = 0;
  child.gauss_.reset();
  return child;
}

RngStream RngStream::substream(std::initializer_list<std::uint64_t> keys) const {
  RngStream child = *this;
  for (auto k : keys) child = child.substream(k);
  return child;
}

}  // namespace qrotor
