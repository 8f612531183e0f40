// Copyright (c) 2026 envkit developers
// SPDX-License-Identifier: Apache-2.0

#pragma once

namespace envkit {

/// Execution policy for the batch kernels.  Serial is the reference
/// implementation; Parallel distributes the loop with OpenMP.  Both produce
/// identical results because every loop item draws from its own
/// index-derived random stream.
enum class Execution { Serial, Parallel };

}  // namespace envkit
