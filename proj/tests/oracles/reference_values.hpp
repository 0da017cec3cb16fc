// Copyright 2026 The randcnn Authors. All Rights Reserved.
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

// Generated by tests/oracles/reference.py. Do not edit.
#pragma once

namespace oracle {
inline constexpr double kContentLoss = 1.0;
inline constexpr double kContentGrad0 = 1.0;
inline constexpr double kContentGrad1 = 0.0;
inline constexpr double kGram00 = 5.0;
inline constexpr double kGram01 = 11.0;
inline constexpr double kGram11 = 25.0;
inline constexpr double kTextureLoss = 2.25;
inline constexpr double kTextureGrad = 6.0;
inline constexpr double kTvLoss = 10.0;
inline constexpr double kTvGrad00 = -6.0;
inline constexpr double kAvgPool = 2.5;
inline constexpr double kChainRule = 6.0;
inline constexpr double kOmega = 0.08333333333333333;
inline constexpr double kMu = 0.0023148148148148147;
inline constexpr double kNetLoss = 8503942.948949447;
inline constexpr double kNetGrad0 = -571.290471596027;
inline constexpr double kNetGrad17 = 12.406169116517047;
inline constexpr double kNetGrad100 = 317.7780926957185;
inline constexpr double kNetGradSumAbs = 120647.72802041916;
}  // namespace oracle
