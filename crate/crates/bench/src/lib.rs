// Copyright 2026 The infodyn Authors
// SPDX-License-Identifier: Apache-2.0

//! Criterion benchmarks for the core kernels live in `benches/`.
