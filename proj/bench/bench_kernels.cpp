// Serial reference kernels against their parallel counterparts on synthetic data.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>

#include "CLI11.hpp"
#include "washtrade/candidates.hpp"
#include "washtrade/graph.hpp"
#include "washtrade/matcher.hpp"
#include "washtrade/pipeline.hpp"
#include "washtrade/synth.hpp"

using namespace washtrade;

namespace {

double best_of(int repeats, const std::function<void()>& fn) {
    double best = 1e300;
    for (int i = 0; i < repeats; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    return best;
}

void row(const char* kernel, double serial, double parallel, bool same) {
    std::printf("%-22s %10.4f %10.4f %8.2fx  %s\n", kernel, serial, parallel, serial / parallel,
                same ? "identical" : "DIFFERENT");
}

ScenarioSpec workload(std::size_t background, std::size_t tokens, std::size_t repetitions) {
    ScenarioSpec spec;
    spec.seed = 7;
    for (auto kind : {StructureKind::loop, StructureKind::cycle, StructureKind::cycle_parallel_edges,
                      StructureKind::cycle_with_subcycles}) {
        auto s = preset_scenario(kind, repetitions).structures[0];
        spec.structures.push_back(s);
    }
    spec.background.trades = background;
    spec.background.tokens = tokens;
    spec.background.seller_pool = 48;
    return spec;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Kernel benchmark: serial reference vs parallel"};
    std::size_t trades = 300000, tokens = 200, repetitions = 200;
    int repeats = 3, threads = 0;
    app.add_option("--trades", trades, "Background trades")->capture_default_str();
    app.add_option("--tokens", tokens, "Background tokens")->capture_default_str();
    app.add_option("--repetitions", repetitions, "Repetitions per embedded structure")->capture_default_str();
    app.add_option("--repeats", repeats, "Timing repeats (best is reported)")->capture_default_str();
    app.add_option("--threads", threads, "OpenMP threads (default: all cores)");
    CLI11_PARSE(app, argc, argv);
    if (threads > 0) omp_set_num_threads(threads);

    const auto data = generate(workload(trades, tokens, repetitions));
    std::printf("%zu trades, %d thread(s)\n\n", data.trades.size(), omp_get_max_threads());
    std::printf("%-22s %10s %10s %9s\n", "kernel", "serial s", "parallel s", "speedup");

    const auto graphs = build_graphs(data.trades);
    SccCountMap a, b;
    const double scc_serial = best_of(repeats, [&] { a = count_sccs_reference(graphs); });
    const double scc_parallel = best_of(repeats, [&] { b = count_sccs(graphs); });
    row("iterative SCC count", scc_serial, scc_parallel, a == b);

    // Long single-market runs stress the prefix search: recompute vs incremental.
    std::mt19937_64 rng(1);
    std::vector<std::vector<MatchTrade>> runs(40);
    for (auto& r : runs) {
        for (int i = 0; i < 2000; ++i) {
            r.push_back({static_cast<std::uint32_t>(rng() % 6), static_cast<std::uint32_t>(rng() % 6),
                         Decimal::from_int(90 + static_cast<std::int64_t>(rng() % 21))});
        }
    }
    std::vector<std::optional<std::size_t>> pa(runs.size()), pb(runs.size());
    const double m_serial = best_of(repeats, [&] {
        for (std::size_t i = 0; i < runs.size(); ++i) pa[i] = longest_balanced_prefix_reference(runs[i], Decimal::from_raw(Decimal::kOne / 100));
    });
    const double m_parallel = best_of(repeats, [&] {
        for (std::size_t i = 0; i < runs.size(); ++i) pb[i] = longest_balanced_prefix(runs[i], Decimal::from_raw(Decimal::kOne / 100));
    });
    row("prefix (incremental)", m_serial, m_parallel, pa == pb);

    DetectionConfig config;
    const auto candidates = select_candidates(count_sccs(graphs), data.trades, config.scc_threshold);
    DetectionResult ra, rb;
    const double d_serial = best_of(repeats, [&] { ra = detect_reference(data.trades, candidates, config); });
    const double d_parallel = best_of(repeats, [&] { rb = detect(data.trades, candidates, config); });
    row("detect", d_serial, d_parallel, ra.labels == rb.labels);

    DetectionRun ea, eb;
    const double e_serial = best_of(repeats, [&] { ea = run_detection(data.trades, config, Execution::reference); });
    const double e_parallel = best_of(repeats, [&] { eb = run_detection(data.trades, config, Execution::parallel); });
    row("graph+candidates+detect", e_serial, e_parallel, ea.result.labels == eb.result.labels);
    return 0;
}
