/*
 * Copyright 2026 The nopsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include <fmt/format.h>
#include <gtest/gtest.h>

#include "support/oracle.hpp"

namespace noptest {
namespace {

class OracleTest : public ::testing::TestWithParam<int> {};

TEST_P(OracleTest, AgreesWithReference) {
  const auto op = static_cast<std::uint8_t>(GetParam());
  const OracleReport r = run_oracle(op, 400, 0x5eed);
  EXPECT_EQ(r.agreed, r.cases) << r.first_mismatch;
  if (op != 0x9A) {
    EXPECT_GT(r.completed, 10u) << "too few cases ran to completion";
  }
}

INSTANTIATE_TEST_SUITE_P(AllOperations, OracleTest, ::testing::Range(0x80, 0xB8),
                         [](const auto& info) { return fmt::format("op{:02X}", info.param); });

TEST(OracleTest, IllegalBytesNeverComplete) {
  for (int b = 0xB8; b < 0xC0; ++b) {
    const OracleReport r = run_oracle(static_cast<std::uint8_t>(b), 50, 3);
    EXPECT_EQ(r.agreed, r.cases) << r.first_mismatch;
    EXPECT_EQ(r.completed, 0u);
  }
}

TEST(OracleTest, ImmediatesAgree) {
  for (int b = 0; b < 0x80; b += 7) {
    const OracleReport r = run_oracle(static_cast<std::uint8_t>(b), 20, 1);
    EXPECT_EQ(r.agreed, r.cases) << r.first_mismatch;
  }
}

}  // namespace
}  // namespace noptest
