#pragma once
// Ranking quality metrics and per-run reports.

#include <string>
#include <vector>

namespace agp {

// NDCG with binary gains: DCG sums 1/log2(p+1) over relevant items at
// positions p <= k; IDCG uses min(|relevant|, k) terms.
double ndcg_at_k(const std::vector<std::string>& ranked,
                 const std::vector<std::string>& relevant, int k);

// Arithmetic mean of the 1-indexed positions of the relevant items.
// Throws DataError if any relevant item is absent from the ranking.
double average_position(const std::vector<std::string>& ranked,
                        const std::vector<std::string>& relevant);

struct PerUserResult {
    std::string user_id;
    std::string mode;
    double ndcg_at_10 = 0.0;
    double gt_avg_pos = 0.0;
    bool repair_applied = false;
    int prompt_version = -1;
    bool hit_at_k = false;
};

struct MetricReport {
    std::string mode;
    int n_users = 0;
    int n_failures = 0;
    double mean_ndcg_at_k = 0.0;
    double mean_gt_position = 0.0;
    double hit_rate_at_k = 0.0;
    double repair_rate = 0.0;
    std::vector<PerUserResult> per_user;
};

MetricReport build_report(const std::vector<PerUserResult>& rows, const std::string& mode);

// report CSV columns: user_id, mode, ndcg_at_10, gt_avg_pos, repair_applied, prompt_version
void write_report_csv(const MetricReport& report, const std::string& path);
std::string report_summary(const MetricReport& report);

}  // namespace agp
