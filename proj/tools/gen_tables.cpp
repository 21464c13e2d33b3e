// Regenerates data/critical_values.csv by simulation.
//   gen_tables <out.csv> [replications]
#include <cstdio>
#include <fstream>
#include <future>
#include <iostream>
#include <string>
#include <vector>

#include "lfm/econotest.hpp"

using namespace lfm;

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: gen_tables <out.csv> [replications]\n";
        return 2;
    }
    const std::size_t reps = argc > 2 ? std::stoul(argv[2]) : 100000;
    const std::vector<std::size_t> sizes{25, 50, 100, 150, 250, 500, 1000};

    struct Job {
        CriticalStat stat;
        Deterministic det;
    };
    std::vector<Job> jobs;
    for (auto det : {Deterministic::None, Deterministic::Constant, Deterministic::ConstantTrend}) {
        jobs.push_back({CriticalStat::AdfT, det});
        jobs.push_back({CriticalStat::AdfRho, det});
    }
    for (auto stat : {CriticalStat::PpT, CriticalStat::PpRho, CriticalStat::DfglsT, CriticalStat::EngleGrangerT}) {
        jobs.push_back({stat, Deterministic::Constant});
    }
    for (auto det : {Deterministic::None, Deterministic::Constant}) {
        jobs.push_back({CriticalStat::JohansenTrace1, det});
        jobs.push_back({CriticalStat::JohansenTrace2, det});
    }

    std::vector<std::future<CriticalValues>> futures;
    for (const auto& job : jobs) {
        for (const auto n : sizes) {
            futures.push_back(std::async(std::launch::async, [job, n, reps] {
                return simulate_critical_values(job.stat, n, job.det, reps);
            }));
        }
    }
    std::vector<CriticalTableRow> rows;
    std::size_t idx = 0;
    for (const auto& job : jobs) {
        for (const auto n : sizes) {
            const CriticalValues cv = futures[idx++].get();
            rows.push_back({job.stat, n, job.det, SignificanceLevel::Pct1, cv.pct1});
            rows.push_back({job.stat, n, job.det, SignificanceLevel::Pct5, cv.pct5});
            rows.push_back({job.stat, n, job.det, SignificanceLevel::Pct10, cv.pct10});
        }
    }
    std::ofstream out(argv[1], std::ios::binary);
    out << format_critical_table(rows, "mc-" + std::to_string(reps) + "-seed20111014");
    std::cerr << "wrote " << rows.size() << " rows to " << argv[1] << "\n";
    return out ? 0 : 1;
}
