// Copyright 2026 The ctrlmut Authors.
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

#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace ctrlmut {

/// Platform-stable 64-bit mix of a parent seed and a list of labels.
/// Used to fan a master seed out to independent, order-free substreams.
std::uint64_t derive_seed(std::uint64_t parent, std::initializer_list<std::string_view> labels);

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace ctrlmut
