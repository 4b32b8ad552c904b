#pragma once

#include <atomic>
#include <cstddef>
#include <new>
#include <vector>

namespace smoke {

// Live/peak count of doubles held by field buffers. Used to verify the
// solver's memory footprint; the counters are process-wide.
namespace payload {

inline std::atomic<long long>& live_counter() {
  static std::atomic<long long> v{0};
  return v;
}
inline std::atomic<long long>& peak_counter() {
  static std::atomic<long long> v{0};
  return v;
}

inline void add(long long n) {
  long long now = live_counter().fetch_add(n) + n;
  long long prev = peak_counter().load();
  while (now > prev && !peak_counter().compare_exchange_weak(prev, now)) {
  }
}
inline void remove(long long n) { live_counter().fetch_sub(n); }

inline long long live() { return live_counter().load(); }
inline long long peak() { return peak_counter().load(); }
/// Restart peak tracking from the current live count.
inline void reset_peak() { peak_counter().store(live_counter().load()); }

}  // namespace payload

template <class T>
struct CountingAllocator {
  using value_type = T;
  CountingAllocator() noexcept = default;
  template <class U>
  CountingAllocator(const CountingAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) {
    payload::add(static_cast<long long>(n));
    return static_cast<T*>(::operator new(n * sizeof(T)));
  }
  void deallocate(T* p, std::size_t n) noexcept {
    payload::remove(static_cast<long long>(n));
    ::operator delete(p);
  }
  template <class U>
  bool operator==(const CountingAllocator<U>&) const noexcept {
    return true;
  }
};

using FieldBuffer = std::vector<double, CountingAllocator<double>>;

}  // namespace smoke
