#include "washtrade/pipeline.hpp"

#include <algorithm>

#include "washtrade/errors.hpp"
#include "washtrade/graph.hpp"

namespace washtrade {

Dataset load_dataset(const DatasetPaths& paths) {
    const auto records = load_trades(paths.trades, paths.format);
    const TokenDecimals decimals = paths.token_metadata ? load_token_metadata(*paths.token_metadata) : TokenDecimals{};
    PreprocessResult pre = preprocess(records, decimals);

    Dataset out;
    out.input_records = records.size();
    out.rejected = pre.rejected;
    if (paths.rates) {
        UsdJoin joined = join_usd(std::move(pre.trades), load_rates(*paths.rates));
        out.trades = std::move(joined.trades);
        out.missing_usd = joined.missing_rate;
    } else {
        out.trades = std::move(pre.trades);
        out.missing_usd = out.trades.size();
    }
    return out;
}

DetectionRun run_detection(std::span<const Trade> trades, const DetectionConfig& config, Execution execution) {
    config.validate();
    if (!std::is_sorted(trades.begin(), trades.end(), OrderKeyLess{})) {
        throw ContractError("trades must be in order-key order");
    }
    const bool parallel = execution == Execution::parallel;
    const SccCountOptions options{config.count_trivial_sccs};

    DetectionRun run;
    {
        const auto graphs = build_graphs(trades);
        run.scc_counts = parallel ? count_sccs(graphs, options) : count_sccs_reference(graphs, options);
    }
    run.candidates = select_candidates(run.scc_counts, trades, config.scc_threshold);
    run.result = parallel ? detect(trades, run.candidates, config) : detect_reference(trades, run.candidates, config);
    return run;
}

QuantifyReports run_quantify(LabeledTrades data, std::span<const WashSet> wash_sets,
                             std::span<const SccKey> candidates, const QuantifyOptions& options) {
    QuantifyReports r;
    r.structures = structure_census(data, options.structure_cap);
    r.shares = token_wash_shares(data, options.basis);
    r.lifespan = lifespan_positions(data);
    r.monthly = volume_time_series(data, Granularity::month);
    r.weekly = volume_time_series(data, Granularity::iso_week);
    r.summary = summary(data, wash_sets, candidates, options.fee_rate);
    r.diagnostics = diagnostics(data.trades);
    return r;
}

}  // namespace washtrade
