// Copyright 2026 The nneq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef NNEQ_PARALLEL_H_
#define NNEQ_PARALLEL_H_

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace nneq {

// Splits [0, n) into `jobs` contiguous chunks and calls fn(chunk, begin, end)
// for each, one thread per chunk. Chunk boundaries depend only on n and the
// effective job count, so callers that merge per-chunk results in chunk order
// get the same answer as a serial run. The first exception thrown by any
// chunk is rethrown after all threads join.
template <typename Fn>
void parallel_chunks(std::size_t n, unsigned jobs, Fn&& fn) {
  const std::size_t chunks =
      std::max<std::size_t>(1, std::min<std::size_t>(jobs == 0 ? 1 : jobs, n));
  if (chunks == 1) {
    fn(std::size_t{0}, std::size_t{0}, n);
    return;
  }
  std::vector<std::exception_ptr> errors(chunks);
  std::vector<std::thread> workers;
  workers.reserve(chunks);
  for (std::size_t k = 0; k < chunks; ++k) {
    const std::size_t begin = n * k / chunks;
    const std::size_t end = n * (k + 1) / chunks;
    workers.emplace_back([&, k, begin, end] {
      try {
        fn(k, begin, end);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    });
  }
  for (std::thread& w : workers) w.join();
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// Effective number of chunks parallel_chunks will use.
inline std::size_t chunk_count(std::size_t n, unsigned jobs) {
  return std::max<std::size_t>(1,
                               std::min<std::size_t>(jobs == 0 ? 1 : jobs, n));
}

// Calls fn(i) for every i in [0, n), distributing indices over threads.
template <typename Fn>
void parallel_for(std::size_t n, unsigned jobs, Fn&& fn) {
  parallel_chunks(n, jobs, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) fn(i);
  });
}

}  // namespace nneq

#endif  // NNEQ_PARALLEL_H_
