#pragma once
// Dataset ingestion: user histories, ground truth, baseline rankings,
// leave-one-out splitting and deterministic train/eval sampling.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace agp {

struct InteractionRecord {
    std::string item_id;
    std::string title;        // textual title the LLM sees
    std::int64_t timestamp;   // epoch seconds, ordering key
};

struct UserRecord {
    std::string user_id;
    std::vector<InteractionRecord> history;  // sorted ascending by timestamp
    std::string validation_item;
    std::vector<std::string> ground_truth;   // distinct, ordered by target rank
};

struct RankedItem {
    std::string item_id;
    std::string title;
};

struct BaselineRanking {
    std::string user_id;
    std::string source_model;
    std::vector<RankedItem> items;  // the upstream recommender's top-k order
};

struct SplitSets {
    std::vector<std::string> train;
    std::vector<std::string> eval;
};

struct DatasetBundle {
    std::map<std::string, UserRecord> users;
    std::map<std::string, BaselineRanking> rankings;
    SplitSets split;
};

struct SyntheticWorldSpec {
    std::uint64_t seed = 0;
    std::vector<std::string> genre_vocabulary;
    int n_users = 0;
    int n_items = 0;
    int history_length = 5;
    int list_length = 10;
    double noise_rate = 0.0;
};

// Reads line-delimited users/rankings files, validates all invariants and
// cross references. Throws ParseError (with file:line) or DataError.
DatasetBundle load_bundle(const std::string& users_path, const std::string& rankings_path);

// Inverse of load_bundle; writes the two line-delimited files.
void save_bundle(const DatasetBundle& bundle, const std::string& users_path,
                 const std::string& rankings_path);

// Validates one user record / ranking pair; throws DataError on violation.
void validate_user(const UserRecord& user);
void validate_ranking(const BaselineRanking& ranking, const UserRecord& user);

struct LooResult {
    std::vector<UserRecord> users;
    std::vector<std::string> dropped;  // user_ids with fewer than 3 interactions
};

// Leave-one-out split: most recent interaction becomes the ground truth,
// second most recent the validation item, the remainder the history.
// Ties in timestamps are broken by item_id so the split is deterministic.
LooResult loo_split(const std::map<std::string, std::vector<InteractionRecord>>& raw);

// Deterministically samples disjoint train/eval user sets of the given sizes.
// With allow_overlap the eval set is drawn independently and may intersect.
DatasetBundle sample_split(DatasetBundle bundle, int n_train, int n_eval,
                           std::uint64_t seed, bool allow_overlap = false);

// Keeps the max_len most recent history entries; shorter histories unchanged.
UserRecord truncate_history(const UserRecord& user, int max_len);

}  // namespace agp
