// Copyright 2026 The sympopt authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <atomic>
#include <cstdint>
#include <cstdlib>

namespace sympopt::opcount {

// Lightweight matrix-product instrumentation.  Off by default; enabled by
// the environment variable SYMPOPT_COUNT_OPS=1 or programmatically.  Tests
// use it to pin down which evaluation path ran: the structured fast paths
// must never form products larger than their contract allows, and that is
// asserted on the recorded shapes rather than trusted from code reading.

struct Snapshot {
  std::int64_t products = 0;     // number of recorded matrix products
  std::int64_t max_dim = 0;      // largest single dimension (rows/inner/cols)
  std::int64_t max_result = 0;   // largest result size rows*cols
};

namespace detail {

inline std::atomic<bool>& enabled_flag() {
  static std::atomic<bool> f{[] {
    const char* v = std::getenv("SYMPOPT_COUNT_OPS");
    return v != nullptr && v[0] == '1';
  }()};
  return f;
}

inline std::atomic<std::int64_t>& product_count() {
  static std::atomic<std::int64_t> c{0};
  return c;
}

inline std::atomic<std::int64_t>& max_dim() {
  static std::atomic<std::int64_t> m{0};
  return m;
}

inline std::atomic<std::int64_t>& max_result() {
  static std::atomic<std::int64_t> m{0};
  return m;
}

inline void raise_to(std::atomic<std::int64_t>& slot, std::int64_t value) {
  std::int64_t cur = slot.load(std::memory_order_relaxed);
  while (cur < value &&
         !slot.compare_exchange_weak(cur, value, std::memory_order_relaxed)) {
  }
}

}  // namespace detail

inline bool enabled() {
  return detail::enabled_flag().load(std::memory_order_relaxed);
}

inline void enable(bool on) { detail::enabled_flag().store(on); }

inline void record_product(std::int64_t rows, std::int64_t inner,
                           std::int64_t cols) {
  if (!enabled()) return;
  detail::product_count().fetch_add(1, std::memory_order_relaxed);
  detail::raise_to(detail::max_dim(),
                   rows > inner ? (rows > cols ? rows : cols)
                                : (inner > cols ? inner : cols));
  detail::raise_to(detail::max_result(), rows * cols);
}

inline void reset() {
  detail::product_count().store(0);
  detail::max_dim().store(0);
  detail::max_result().store(0);
}

inline Snapshot snapshot() {
  return {detail::product_count().load(), detail::max_dim().load(),
          detail::max_result().load()};
}

}  // namespace sympopt::opcount
