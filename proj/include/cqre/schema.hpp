#pragma once

#include <array>
#include <string_view>

namespace cqre {

// Canonical trace schema. Every CSV produced or consumed by the toolchain
// uses exactly these columns, in this order.
inline constexpr int kFeatureCount = 17;

inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "avg_arrival_rate",
    "stream_no",
    "subquery_no",
    "agg_func_no",
    "join_predicate",
    "project_size",
    "equ_select_predicate",
    "inequ_select_predicate",
    "agg_column_no",
    "opt_window",
    "opt_filter",
    "opt_project",
    "opt_join",
    "opt_aggregate",
    "opt_distinct",
    "win_type_size",
    "win_type_slide",
};

inline constexpr int kTraceColumnCount = kFeatureCount + 3;

inline constexpr std::array<std::string_view, kTraceColumnCount> kTraceColumns = {
    "query_id",
    "avg_arrival_rate",
    "stream_no",
    "subquery_no",
    "agg_func_no",
    "join_predicate",
    "project_size",
    "equ_select_predicate",
    "inequ_select_predicate",
    "agg_column_no",
    "opt_window",
    "opt_filter",
    "opt_project",
    "opt_join",
    "opt_aggregate",
    "opt_distinct",
    "win_type_size",
    "win_type_slide",
    "cpu_frac",
    "mem_frac",
};

// Index of a feature column within kFeatureNames, -1 if unknown.
int feature_index(std::string_view name);

}  // namespace cqre
