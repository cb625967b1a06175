// Copyright 2026 The consmatch Authors.
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

#ifndef CONSMATCH_SRC_PARALLEL_HPP_
#define CONSMATCH_SRC_PARALLEL_HPP_

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace consmatch::internal {

// Runs fn(i) for i in [0, count) on up to `threads` workers. Work is split
// into contiguous chunks; the first exception thrown is rethrown.
template <typename Fn>
void ParallelFor(int count, int threads, Fn&& fn) {
  threads = std::clamp(threads, 1, std::max(count, 1));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex mutex;
  {
    std::vector<std::jthread> workers;
    workers.reserve(threads);
    for (int t = 0; t < threads; ++t) {
      const int begin = count * t / threads;
      const int end = count * (t + 1) / threads;
      workers.emplace_back([&, begin, end] {
        try {
          for (int i = begin; i < end; ++i) fn(i);
        } catch (...) {
          std::lock_guard lock(mutex);
          if (!failure) failure = std::current_exception();
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace consmatch::internal

#endif  // CONSMATCH_SRC_PARALLEL_HPP_
