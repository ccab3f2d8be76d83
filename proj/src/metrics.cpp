#include "agp/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "agp/errors.hpp"

namespace agp {

double ndcg_at_k(const std::vector<std::string>& ranked,
                 const std::vector<std::string>& relevant, int k) {
    if (relevant.empty()) throw PreconditionError("ndcg_at_k: empty relevant set");
    if (k < 1) throw PreconditionError("ndcg_at_k: k must be >= 1");
    std::set<std::string> rel(relevant.begin(), relevant.end());

    double dcg = 0.0;
    const std::size_t limit = std::min(ranked.size(), static_cast<std::size_t>(k));
    for (std::size_t p = 1; p <= limit; ++p) {
        if (rel.count(ranked[p - 1]))
            dcg += 1.0 / std::log2(static_cast<double>(p) + 1.0);
    }
    const std::size_t ideal_terms = std::min(rel.size(), static_cast<std::size_t>(k));
    double idcg = 0.0;
    for (std::size_t j = 1; j <= ideal_terms; ++j)
        idcg += 1.0 / std::log2(static_cast<double>(j) + 1.0);
    return dcg / idcg;
}

double average_position(const std::vector<std::string>& ranked,
                        const std::vector<std::string>& relevant) {
    if (relevant.empty()) throw PreconditionError("average_position: empty relevant set");
    double sum = 0.0;
    for (const auto& item : relevant) {
        bool found = false;
        for (std::size_t p = 0; p < ranked.size(); ++p) {
            if (ranked[p] == item) {
                sum += static_cast<double>(p + 1);
                found = true;
                break;
            }
        }
        if (!found) throw DataError("average_position: item " + item + " missing from ranking");
    }
    return sum / static_cast<double>(relevant.size());
}

MetricReport build_report(const std::vector<PerUserResult>& rows, const std::string& mode) {
    if (rows.empty()) throw PreconditionError("build_report: no per-user results");
    MetricReport r;
    r.mode = mode;
    r.n_users = static_cast<int>(rows.size());
    double ndcg = 0.0, pos = 0.0, hits = 0.0, repairs = 0.0;
    for (const auto& row : rows) {
        ndcg += row.ndcg_at_10;
        pos += row.gt_avg_pos;
        hits += row.hit_at_k ? 1.0 : 0.0;
        repairs += row.repair_applied ? 1.0 : 0.0;
    }
    const double n = static_cast<double>(rows.size());
    r.mean_ndcg_at_k = ndcg / n;
    r.mean_gt_position = pos / n;
    r.hit_rate_at_k = hits / n;
    r.repair_rate = repairs / n;
    r.per_user = rows;
    return r;
}

void write_report_csv(const MetricReport& report, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw DataError("cannot write report: " + path);
    f << "user_id,mode,ndcg_at_10,gt_avg_pos,repair_applied,prompt_version\n";
    char buf[64];
    for (const auto& row : report.per_user) {
        std::snprintf(buf, sizeof(buf), "%.6f", row.ndcg_at_10);
        f << row.user_id << "," << row.mode << "," << buf << ",";
        std::snprintf(buf, sizeof(buf), "%.6f", row.gt_avg_pos);
        f << buf << "," << (row.repair_applied ? 1 : 0) << "," << row.prompt_version << "\n";
    }
}

std::string report_summary(const MetricReport& report) {
    std::ostringstream os;
    char buf[64];
    os << "mode=" << report.mode << " users=" << report.n_users;
    if (report.n_failures > 0) os << " failures=" << report.n_failures;
    std::snprintf(buf, sizeof(buf), "%.4f", report.mean_ndcg_at_k);
    os << " mean_ndcg@10=" << buf;
    std::snprintf(buf, sizeof(buf), "%.3f", report.mean_gt_position);
    os << " mean_gt_pos=" << buf;
    std::snprintf(buf, sizeof(buf), "%.3f", report.hit_rate_at_k);
    os << " hit_rate=" << buf;
    std::snprintf(buf, sizeof(buf), "%.3f", report.repair_rate);
    os << " repair_rate=" << buf;
    return os.str();
}

}  // namespace agp
