#include "agp/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "agp/errors.hpp"
#include "agp/rng.hpp"

namespace agp {

using nlohmann::json;

namespace {

std::string trimmed(const std::string& s) {
    const char* ws = " \t\r\n";
    auto b = s.find_first_not_of(ws);
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

json parse_line(const std::string& path, std::size_t line_no, const std::string& line) {
    try {
        return json::parse(line);
    } catch (const json::exception& e) {
        throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
}

}  // namespace

void validate_user(const UserRecord& user) {
    if (user.user_id.empty()) throw DataError("user record with empty user_id");
    std::set<std::string> history_ids;
    std::int64_t prev_ts = 0;
    std::string prev_id;
    bool first = true;
    for (const auto& rec : user.history) {
        if (trimmed(rec.title).empty())
            throw DataError("user " + user.user_id + ": history item " + rec.item_id +
                            " has an empty title");
        if (!first) {
            if (rec.timestamp < prev_ts ||
                (rec.timestamp == prev_ts && rec.item_id <= prev_id))
                throw DataError("user " + user.user_id +
                                ": history not strictly ordered by (timestamp, item_id) at item " +
                                rec.item_id);
        }
        prev_ts = rec.timestamp;
        prev_id = rec.item_id;
        first = false;
        history_ids.insert(rec.item_id);
    }
    if (user.ground_truth.empty())
        throw DataError("user " + user.user_id + ": empty ground truth");
    std::set<std::string> gt(user.ground_truth.begin(), user.ground_truth.end());
    if (gt.size() != user.ground_truth.size())
        throw DataError("user " + user.user_id + ": duplicate ground-truth items");
    for (const auto& g : user.ground_truth)
        if (history_ids.count(g))
            throw DataError("user " + user.user_id + ": ground-truth item " + g +
                            " appears in history");
    if (!user.validation_item.empty() && history_ids.count(user.validation_item))
        throw DataError("user " + user.user_id + ": validation item appears in history");
}

void validate_ranking(const BaselineRanking& ranking, const UserRecord& user) {
    if (ranking.items.empty())
        throw DataError("ranking for " + ranking.user_id + " is empty");
    std::set<std::string> ids;
    for (const auto& it : ranking.items) {
        if (trimmed(it.title).empty())
            throw DataError("ranking for " + ranking.user_id + ": item " + it.item_id +
                            " has an empty title");
        if (!ids.insert(it.item_id).second)
            throw DataError("ranking for " + ranking.user_id + ": duplicate item " + it.item_id);
    }
    bool any_gt = false;
    for (const auto& g : user.ground_truth)
        if (ids.count(g)) any_gt = true;
    if (!any_gt)
        throw DataError("ranking for " + ranking.user_id +
                        " contains none of the user's ground-truth items");
}

DatasetBundle load_bundle(const std::string& users_path, const std::string& rankings_path) {
    std::ifstream uf(users_path);
    if (!uf) throw DataError("cannot open users file: " + users_path);
    std::ifstream rf(rankings_path);
    if (!rf) throw DataError("cannot open rankings file: " + rankings_path);

    DatasetBundle bundle;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(uf, line)) {
        ++line_no;
        if (trimmed(line).empty()) continue;
        json j = parse_line(users_path, line_no, line);
        UserRecord u;
        try {
            u.user_id = j.at("user_id").get<std::string>();
            for (const auto& h : j.at("history")) {
                u.history.push_back({h.at("item_id").get<std::string>(),
                                     h.at("title").get<std::string>(),
                                     h.at("timestamp").get<std::int64_t>()});
            }
            u.validation_item = j.value("validation_item", std::string{});
            for (const auto& g : j.at("ground_truth"))
                u.ground_truth.push_back(g.get<std::string>());
        } catch (const json::exception& e) {
            throw ParseError(users_path + ":" + std::to_string(line_no) + ": " + e.what());
        }
        validate_user(u);
        if (!bundle.users.emplace(u.user_id, std::move(u)).second)
            throw DataError(users_path + ":" + std::to_string(line_no) + ": duplicate user");
    }

    line_no = 0;
    while (std::getline(rf, line)) {
        ++line_no;
        if (trimmed(line).empty()) continue;
        json j = parse_line(rankings_path, line_no, line);
        BaselineRanking r;
        try {
            r.user_id = j.at("user_id").get<std::string>();
            r.source_model = j.value("source_model", std::string{});
            for (const auto& it : j.at("items"))
                r.items.push_back({it.at("item_id").get<std::string>(),
                                   it.at("title").get<std::string>()});
        } catch (const json::exception& e) {
            throw ParseError(rankings_path + ":" + std::to_string(line_no) + ": " + e.what());
        }
        auto user_it = bundle.users.find(r.user_id);
        if (user_it == bundle.users.end())
            throw DataError("ranking references unknown user " + r.user_id);
        validate_ranking(r, user_it->second);
        if (!bundle.rankings.emplace(r.user_id, std::move(r)).second)
            throw DataError(rankings_path + ":" + std::to_string(line_no) +
                            ": duplicate ranking for user");
    }
    return bundle;
}

void save_bundle(const DatasetBundle& bundle, const std::string& users_path,
                 const std::string& rankings_path) {
    std::ofstream uf(users_path);
    if (!uf) throw DataError("cannot write users file: " + users_path);
    for (const auto& [id, u] : bundle.users) {
        json j;
        j["user_id"] = id;
        json hist = json::array();
        for (const auto& h : u.history)
            hist.push_back({{"item_id", h.item_id}, {"title", h.title}, {"timestamp", h.timestamp}});
        j["history"] = std::move(hist);
        j["validation_item"] = u.validation_item;
        j["ground_truth"] = u.ground_truth;
        uf << j.dump() << "\n";
    }
    std::ofstream rf(rankings_path);
    if (!rf) throw DataError("cannot write rankings file: " + rankings_path);
    for (const auto& [id, r] : bundle.rankings) {
        json j;
        j["user_id"] = id;
        j["source_model"] = r.source_model;
        json items = json::array();
        for (const auto& it : r.items)
            items.push_back({{"item_id", it.item_id}, {"title", it.title}});
        j["items"] = std::move(items);
        rf << j.dump() << "\n";
    }
}

LooResult loo_split(const std::map<std::string, std::vector<InteractionRecord>>& raw) {
    LooResult out;
    for (const auto& [uid, interactions] : raw) {
        if (interactions.size() < 3) {
            out.dropped.push_back(uid);
            continue;
        }
        auto sorted = interactions;
        std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
            if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
            return a.item_id < b.item_id;
        });
        UserRecord u;
        u.user_id = uid;
        u.ground_truth = {sorted.back().item_id};
        u.validation_item = sorted[sorted.size() - 2].item_id;
        sorted.resize(sorted.size() - 2);
        // A held-out item may also occur earlier in the history (repeat
        // interactions); those occurrences are removed to keep it held out.
        for (auto& rec : sorted) {
            if (rec.item_id == u.ground_truth[0] || rec.item_id == u.validation_item) continue;
            u.history.push_back(std::move(rec));
        }
        if (u.history.empty()) {
            out.dropped.push_back(uid);
            continue;
        }
        validate_user(u);
        out.users.push_back(std::move(u));
    }
    return out;
}

DatasetBundle sample_split(DatasetBundle bundle, int n_train, int n_eval,
                           std::uint64_t seed, bool allow_overlap) {
    if (n_train < 0 || n_eval < 0) throw PreconditionError("split sizes must be non-negative");
    const std::size_t need = static_cast<std::size_t>(n_train) +
                             (allow_overlap ? 0 : static_cast<std::size_t>(n_eval));
    if (need > bundle.users.size() ||
        static_cast<std::size_t>(n_eval) > bundle.users.size())
        throw DataError("insufficient users: have " + std::to_string(bundle.users.size()) +
                        ", need " + std::to_string(n_train) + " train + " +
                        std::to_string(n_eval) + " eval");

    std::vector<std::string> ids;
    ids.reserve(bundle.users.size());
    for (const auto& [id, _] : bundle.users) ids.push_back(id);

    auto rng = substream(seed, 0xA11);
    deterministic_shuffle(ids, rng);
    bundle.split.train.assign(ids.begin(), ids.begin() + n_train);
    if (allow_overlap) {
        auto rng2 = substream(seed, 0xE7A);
        auto pool = ids;
        deterministic_shuffle(pool, rng2);
        bundle.split.eval.assign(pool.begin(), pool.begin() + n_eval);
    } else {
        bundle.split.eval.assign(ids.begin() + n_train, ids.begin() + n_train + n_eval);
    }
    std::sort(bundle.split.train.begin(), bundle.split.train.end());
    std::sort(bundle.split.eval.begin(), bundle.split.eval.end());
    return bundle;
}

UserRecord truncate_history(const UserRecord& user, int max_len) {
    if (max_len < 1) throw PreconditionError("max_len must be >= 1");
    UserRecord out = user;
    const std::size_t keep = static_cast<std::size_t>(max_len);
    if (out.history.size() > keep)
        out.history.erase(out.history.begin(),
                          out.history.end() - static_cast<std::ptrdiff_t>(keep));
    return out;
}

}  // namespace agp
