# Copyright (c) 2026 The r2s Authors. All Rights Reserved.
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

"""Reference pixels pinned in test_cli.cpp.

A Mel dump whose value equals the band index (0..79) normalizes band b to
b / 79; the heatmap color of that band is matplotlib's viridis at that
position.
"""

import matplotlib
import numpy as np


def main():
    bands = np.array([0, 40, 79])
    rgb = matplotlib.colormaps["viridis"](bands / 79.0, bytes=True)[:, :3]
    for b, c in zip(bands, rgb.tolist()):
        print(b, c)


if __name__ == "__main__":
    main()
