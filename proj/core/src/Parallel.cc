//------------------------------- -*- C++ -*- -------------------------------//
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file Parallel.cc
//---------------------------------------------------------------------------//
#include "ltid/Parallel.hh"

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace ltid
{
//---------------------------------------------------------------------------//
int thread_count()
{
    if (char const* env = std::getenv("LTID_NUM_THREADS"))
    {
        int n = std::atoi(env);
        if (n > 0)
            return n;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(int n, std::function<void(int)> const& fn)
{
    int workers = std::min(thread_count(), n);
    if (workers <= 1)
    {
        for (int i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w)
    {
        pool.emplace_back([w, workers, n, &fn] {
            for (int i = w; i < n; i += workers)
                fn(i);
        });
    }
    for (auto& t : pool)
        t.join();
}

//---------------------------------------------------------------------------//
}  // namespace ltid
