# Copyright 2026 The ctrlmut Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import random


def optimize(objective, dim, budget, lower, upper, seed):
    rng = random.Random(seed)
    best = None
    for _ in range(budget):
        x = [rng.uniform(lower, upper) for _ in range(dim)]
        y = objective(x)
        if best is None or y < best:
            best = y
    return best
