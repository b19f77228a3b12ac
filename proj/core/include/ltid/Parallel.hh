//------------------------------- -*- C++ -*- -------------------------------//
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file ltid/Parallel.hh
//---------------------------------------------------------------------------//
#pragma once

#include <functional>

namespace ltid
{
//---------------------------------------------------------------------------//
/*!
 * Worker count: LTID_NUM_THREADS if set, else the hardware concurrency.
 */
int thread_count();

/*!
 * Run fn(i) for i in [0, n) over a static partition of worker threads.
 *
 * Each index is processed by exactly one thread, so per-index results do
 * not depend on the thread count.
 */
void parallel_for(int n, std::function<void(int)> const& fn);

//---------------------------------------------------------------------------//
}  // namespace ltid
