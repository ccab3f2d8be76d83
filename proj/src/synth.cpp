#include "agp/synth.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <set>

#include "agp/errors.hpp"
#include "agp/rng.hpp"

namespace agp {

namespace {

constexpr std::array<const char*, 16> kAdjectives = {
    "Crimson", "Silent",  "Wandering", "Golden",  "Hollow",   "Iron",
    "Velvet",  "Shattered", "Midnight", "Emerald", "Forgotten", "Burning",
    "Distant", "Gilded",  "Restless",  "Pale"};

constexpr std::array<const char*, 16> kNouns = {
    "Saga",    "Chronicle", "Ballad", "Voyage", "Garden",  "Empire",
    "Cipher",  "Harbor",    "Lantern", "Orchard", "Paradox", "Citadel",
    "Meridian", "Threshold", "Vigil",  "Atlas"};

std::string item_id_for(int index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "i%05d", index);
    return buf;
}

std::string user_id_for(int index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "u%04d", index);
    return buf;
}

std::string title_for(int index, const std::vector<std::string>& genres) {
    std::string name = std::string("The ") + kAdjectives[(index / 16) % 16] + " " +
                       kNouns[index % 16];
    if (index >= 256) name += " " + std::to_string(index / 256 + 1);
    name += " [";
    for (std::size_t i = 0; i < genres.size(); ++i) {
        if (i) name += " ";
        name += genres[i];
    }
    name += "]";
    return name;
}

// History archetypes. Slot entries index the per-user genre assignment:
// 1 = dominant genre, 2 = secondary, 3 = tertiary, 4 = noise. The most recent
// slot is always the dominant genre alone. Archetypes differ in how hard the
// secondary preference is to recover from the titles:
//   A: clean, the dominant genre appears in every title.
//   B: one stray noise title.
//   C: a recurring noise genre that outweighs the real signal until
//      preferences are ranked by strength.
//   D: a recurring noise genre distinguishable only by recency.
//   E: a recurring noise distractor concentrated in recent titles; no prompt
//      recovers the secondary preference fully.
using SlotGenres = std::vector<int>;
using Archetype = std::vector<SlotGenres>;

const Archetype kArchA = {{1, 2}, {1, 3}, {1, 2}, {1, 3}, {1}};
const Archetype kArchB = {{4}, {2, 3}, {2, 3}, {1}, {1}};
const Archetype kArchC = {{4, 3}, {4, 2}, {2, 3}, {1, 2}, {1}};
const Archetype kArchD = {{4, 3}, {4, 3}, {1, 2}, {2}, {1}};
const Archetype kArchE = {{2, 3}, {2, 3}, {4, 1}, {4, 1}, {1}};

const Archetype& archetype_for(double noise_rate, int user_index) {
    if (noise_rate <= 0.0) return kArchA;
    if (noise_rate >= 0.5) return kArchE;
    switch (user_index % 4) {
        case 0: return kArchA;
        case 1: return kArchB;
        case 2: return kArchC;
        default: return kArchD;
    }
}

// Pads or trims an archetype to the requested history length, keeping the
// most recent slots.
Archetype sized_archetype(const Archetype& base, int m) {
    Archetype out = base;
    while (static_cast<int>(out.size()) < m) {
        out.insert(out.begin(), (out.size() % 2 == 0) ? SlotGenres{1, 2} : SlotGenres{1, 3});
    }
    if (static_cast<int>(out.size()) > m)
        out.erase(out.begin(), out.begin() + (static_cast<int>(out.size()) - m));
    return out;
}

}  // namespace

DatasetBundle generate_synthetic_world(const SyntheticWorldSpec& spec) {
    const int V = static_cast<int>(spec.genre_vocabulary.size());
    const int k = spec.list_length;
    const int m = spec.history_length;
    if (V < 4) throw ConfigError("infeasible world spec: need at least 4 genres");
    {
        std::set<std::string> uniq(spec.genre_vocabulary.begin(), spec.genre_vocabulary.end());
        if (static_cast<int>(uniq.size()) != V)
            throw ConfigError("infeasible world spec: duplicate genres in vocabulary");
    }
    if (spec.n_items < k)
        throw ConfigError("infeasible world spec: n_items < list_length");
    if (k < 3) throw ConfigError("infeasible world spec: list_length must be >= 3");
    if (m < 3) throw ConfigError("infeasible world spec: history_length must be >= 3");
    if (spec.n_users < 1) throw ConfigError("infeasible world spec: n_users must be >= 1");
    if (spec.noise_rate < 0.0 || spec.noise_rate > 1.0)
        throw ConfigError("infeasible world spec: noise_rate outside [0,1]");

    const int noise_decoys = std::min(3, k - 3);
    const int zero_decoys = k - 3 - noise_decoys;
    const int genres_needed = 3 + (k > 3 ? 1 : 0) + (zero_decoys > 0 ? 1 : 0);
    if (V < genres_needed)
        throw ConfigError("infeasible world spec: need at least " +
                          std::to_string(genres_needed) + " genres for list_length " +
                          std::to_string(k));
    const int items_per_user = k + m;
    if (static_cast<long long>(items_per_user) * spec.n_users > spec.n_items)
        throw ConfigError("infeasible world spec: need " +
                          std::to_string(static_cast<long long>(items_per_user) * spec.n_users) +
                          " items, have " + std::to_string(spec.n_items));

    DatasetBundle bundle;
    for (int u = 0; u < spec.n_users; ++u) {
        // Genre assignment: dominant genre rotates through the vocabulary,
        // the rest are drawn per user.
        const std::string g1 = spec.genre_vocabulary[u % V];
        std::vector<std::string> rest;
        for (const auto& g : spec.genre_vocabulary)
            if (g != g1) rest.push_back(g);
        auto grng = substream(spec.seed, 0x5EED0000ull + static_cast<std::uint64_t>(u));
        deterministic_shuffle(rest, grng);
        const std::string g2 = rest[0];
        const std::string g3 = rest[1];
        const std::string gx = rest[2];
        const std::string gz = rest.size() > 3 ? rest[3] : std::string{};

        auto genre_of = [&](int idx) -> std::string {
            switch (idx) {
                case 1: return g1;
                case 2: return g2;
                case 3: return g3;
                default: return gx;
            }
        };

        const int base = u * items_per_user;
        int next = base;
        auto make_item = [&](const std::vector<std::string>& genres) -> RankedItem {
            RankedItem it{item_id_for(next), title_for(next, genres)};
            ++next;
            return it;
        };

        // Item id order within a user's block: zero-score decoys first, then
        // the first ground-truth item, the noise decoys, the second
        // ground-truth item, the validation item, and finally history items.
        std::vector<RankedItem> zeros;
        for (int i = 0; i < zero_decoys; ++i) zeros.push_back(make_item({gz}));
        RankedItem gt1 = make_item({g1});
        std::vector<RankedItem> noise;
        for (int i = 0; i < noise_decoys; ++i) noise.push_back(make_item({gx}));
        RankedItem gt2 = make_item({g2});
        RankedItem val = make_item({g3});

        UserRecord user;
        user.user_id = user_id_for(u);
        const Archetype arch = sized_archetype(archetype_for(spec.noise_rate, u), m);
        std::int64_t ts = 1700000000;
        for (const auto& slot : arch) {
            std::vector<std::string> genres;
            for (int idx : slot) genres.push_back(genre_of(idx));
            RankedItem it = make_item(genres);
            user.history.push_back({it.item_id, it.title, ts});
            ts += 86400;
        }
        user.validation_item = val.item_id;
        user.ground_truth = {gt1.item_id, gt2.item_id};

        BaselineRanking ranking;
        ranking.user_id = user.user_id;
        ranking.source_model = "synthetic-v1";
        ranking.items = zeros;
        ranking.items.push_back(gt1);
        for (auto& n : noise) ranking.items.push_back(n);
        ranking.items.push_back(gt2);
        ranking.items.push_back(val);
        auto brng = substream(spec.seed, 0xBA5E0000ull + static_cast<std::uint64_t>(u));
        deterministic_shuffle(ranking.items, brng);

        validate_user(user);
        validate_ranking(ranking, user);
        bundle.users.emplace(user.user_id, std::move(user));
        bundle.rankings.emplace(ranking.user_id, std::move(ranking));
    }
    return bundle;
}

}  // namespace agp
