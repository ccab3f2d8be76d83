#include "agp/feedback.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "agp/errors.hpp"
#include "agp/prompts.hpp"

namespace agp {

using nlohmann::json;

FeedbackSet compute_feedback(const RerankedList& reranked,
                             const std::vector<std::string>& ground_truth,
                             const BaselineRanking& baseline) {
    if (ground_truth.empty())
        throw PreconditionError("compute_feedback: empty ground truth");

    std::map<std::string, int> rank_of;  // 1-indexed
    for (std::size_t i = 0; i < reranked.items.size(); ++i)
        rank_of[reranked.items[i]] = static_cast<int>(i) + 1;
    std::map<std::string, std::string> title_of;
    for (const auto& it : baseline.items) title_of[it.item_id] = it.title;

    FeedbackSet fs;
    fs.user_id = reranked.user_id;
    double sum = 0.0;
    for (std::size_t j = 0; j < ground_truth.size(); ++j) {
        const std::string& id = ground_truth[j];
        auto it = rank_of.find(id);
        if (it == rank_of.end())
            throw DataError("compute_feedback: ground-truth item " + id +
                            " missing from reranked list of user " + reranked.user_id);
        FeedbackPair pair;
        pair.item_id = id;
        pair.title = title_of.count(id) ? title_of[id] : id;
        pair.actual_pos = it->second;
        pair.target_pos = static_cast<int>(j) + 1;
        sum += pair.actual_pos;
        fs.pairs.push_back(std::move(pair));
    }
    fs.avg_pos = sum / static_cast<double>(ground_truth.size());
    fs.weight = 1.0 / fs.avg_pos;
    return fs;
}

FeedbackSet verbalize_feedback(FeedbackSet fs, const UserProfile& profile, Gateway& gateway,
                               const VerbalizeOptions& options) {
    if (fs.pairs.empty())
        throw PreconditionError("verbalize_feedback: pairs not computed");

    std::ostringstream user;
    user << "User profile:\n" << profile.text << "\n";
    if (options.pbf_enabled) {
        user << "\nGround-truth placements:\n";
        for (const auto& p : fs.pairs)
            user << "- item " << p.item_id << " \"" << p.title << "\": actual position "
                 << p.actual_pos << ", target position " << p.target_pos << "\n";
    } else {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.3f", options.metric);
        user << "\nAverage NDCG@10: " << buf << "\n";
    }

    ChatRequest req;
    req.purpose = Purpose::loss;
    req.messages.push_back({"system", loss_system_prompt()});
    req.messages.push_back({"user", user.str()});
    ChatResponse resp = gateway.complete(req);
    fs.diagnosis = resp.text;
    return fs;
}

double batch_weight(const std::vector<FeedbackSet>& feedbacks) {
    if (feedbacks.empty()) throw PreconditionError("batch_weight: empty batch");
    double sum = 0.0;
    for (const auto& fs : feedbacks) sum += fs.avg_pos;
    return 1.0 / (sum / static_cast<double>(feedbacks.size()));
}

void append_feedback(const FeedbackSet& fs, int epoch, int batch_index,
                     const std::string& path) {
    std::ofstream f(path, std::ios::app);
    if (!f) throw DataError("cannot write feedback log: " + path);
    json j;
    j["user_id"] = fs.user_id;
    json pairs = json::array();
    for (const auto& p : fs.pairs)
        pairs.push_back({{"item_id", p.item_id}, {"actual", p.actual_pos}, {"target", p.target_pos}});
    j["pairs"] = std::move(pairs);
    j["avg_pos"] = fs.avg_pos;
    j["weight"] = fs.weight;
    j["diagnosis"] = fs.diagnosis;
    j["epoch"] = epoch;
    j["batch_index"] = batch_index;
    f << j.dump() << "\n";
}

}  // namespace agp
