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

#ifndef NNEQ_TESTS_TEST_SUPPORT_H_
#define NNEQ_TESTS_TEST_SUPPORT_H_

#include <cmath>

#include "doctest.h"

// Absolute-tolerance check that prints both operands on failure.
#define CHECK_NEAR(a, b, tol)                                              \
  do {                                                                     \
    const double nneq_a_ = (a);                                            \
    const double nneq_b_ = (b);                                            \
    CHECK_MESSAGE(std::abs(nneq_a_ - nneq_b_) <= (tol), #a " = ", nneq_a_, \
                  ", expected ", nneq_b_, " within ", (tol));              \
  } while (false)

#endif  // NNEQ_TESTS_TEST_SUPPORT_H_
