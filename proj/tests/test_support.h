// Copyright 2026 The EvoFlow Authors.
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

#ifndef EVOFLOW_TESTS_TEST_SUPPORT_H_
#define EVOFLOW_TESTS_TEST_SUPPORT_H_

#include <atomic>
#include <filesystem>
#include <random>
#include <string>
#include <unistd.h>

#include "evoflow/ml.h"

namespace evoflow::testing {

inline std::filesystem::path DataDir() { return EVOFLOW_DATA_DIR; }

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("evoflow-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// Two Gaussian blobs per class centre, `per_class` rows each.
inline ml::Dataset Blobs(int per_class, int classes, int dims, double spread,
                         std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, spread);
  ml::Dataset d;
  d.name = "blobs";
  const int n = per_class * classes;
  d.features.resize(n, dims);
  for (int c = 0; c < classes; ++c) {
    d.class_names.push_back("c" + std::to_string(c));
    for (int i = 0; i < per_class; ++i) {
      const int row = c * per_class + i;
      for (int j = 0; j < dims; ++j) d.features(row, j) = 4.0 * ((c + j) % classes) + noise(rng);
      d.labels.push_back(c);
    }
  }
  return d;
}

}  // namespace evoflow::testing

#endif  // EVOFLOW_TESTS_TEST_SUPPORT_H_
