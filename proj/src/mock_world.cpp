#include "agp/mock_world.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>

#include "agp/errors.hpp"
#include "agp/prompts.hpp"

namespace agp {

namespace {

const char* kFocus = "FOCUS_RECURRING_GENRES";
const char* kIgnoreNoise = "IGNORE_NOISE_TITLES";
const char* kRankStrength = "RANK_BY_PREFERENCE_STRENGTH";
const char* kWeightRecent = "WEIGHT_RECENT_ITEMS";

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::string cur;
    for (char c : text) {
        if (c == '\n') {
            lines.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    if (!cur.empty()) lines.push_back(cur);
    return lines;
}

std::string strip(const std::string& s) {
    auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

// Genre tokens live in the trailing bracket group of a title.
std::vector<std::string> bracket_genres(const std::string& title) {
    auto close = title.rfind(']');
    if (close == std::string::npos) return {};
    auto open = title.rfind('[', close);
    if (open == std::string::npos) return {};
    std::istringstream is(title.substr(open + 1, close - open - 1));
    std::vector<std::string> out;
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

// "3. The Crimson Saga [fantasy]" history lines, in order.
std::vector<std::string> history_titles(const std::string& text) {
    std::vector<std::string> titles;
    for (const auto& raw : split_lines(text)) {
        const std::string line = strip(raw);
        std::size_t i = 0;
        while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
        if (i == 0 || i >= line.size() || line[i] != '.') continue;
        std::string title = strip(line.substr(i + 1));
        if (!title.empty()) titles.push_back(title);
    }
    return titles;
}

struct Candidate {
    int presented_index;  // 1-based position in the request
    std::string title;
    std::string item_id;
};

// "[2] The Crimson Saga [fantasy] (id:i00012)" candidate lines.
std::vector<Candidate> parse_candidates(const std::string& text) {
    std::vector<Candidate> out;
    for (const auto& raw : split_lines(text)) {
        const std::string line = strip(raw);
        if (line.size() < 4 || line[0] != '[') continue;
        auto close = line.find(']');
        if (close == std::string::npos) continue;
        int idx = 0;
        try {
            idx = std::stoi(line.substr(1, close - 1));
        } catch (...) {
            continue;
        }
        std::string rest = strip(line.substr(close + 1));
        auto id_pos = rest.rfind("(id:");
        if (id_pos == std::string::npos) continue;
        auto id_end = rest.find(')', id_pos);
        if (id_end == std::string::npos) continue;
        Candidate c;
        c.presented_index = idx;
        c.item_id = rest.substr(id_pos + 4, id_end - id_pos - 4);
        c.title = strip(rest.substr(0, id_pos));
        out.push_back(std::move(c));
    }
    return out;
}

// "- fantasy (strength 4)" profile lines.
std::vector<std::pair<std::string, int>> parse_profile_lines(const std::string& text) {
    std::vector<std::pair<std::string, int>> out;
    for (const auto& raw : split_lines(text)) {
        const std::string line = strip(raw);
        if (line.rfind("- ", 0) != 0) continue;
        auto mark = line.find(" (strength ");
        if (mark == std::string::npos) continue;
        auto close = line.find(')', mark);
        if (close == std::string::npos) continue;
        std::string genre = strip(line.substr(2, mark - 2));
        int strength = 0;
        try {
            strength = std::stoi(line.substr(mark + 11, close - mark - 11));
        } catch (...) {
            continue;
        }
        if (!genre.empty()) out.emplace_back(genre, strength);
    }
    return out;
}

struct Placement {
    std::string item_id;
    std::string title;
    int actual = 0;
    int target = 0;
};

// "- item i00012 "The Crimson Saga [fantasy]": actual position 5, target position 2"
std::vector<Placement> parse_placements(const std::string& text) {
    std::vector<Placement> out;
    for (const auto& raw : split_lines(text)) {
        const std::string line = strip(raw);
        if (line.rfind("- item ", 0) != 0) continue;
        auto quote1 = line.find('"');
        auto quote2 = (quote1 == std::string::npos) ? std::string::npos
                                                    : line.find('"', quote1 + 1);
        auto actual_pos = line.find("actual position ");
        auto target_pos = line.find("target position ");
        if (quote1 == std::string::npos || quote2 == std::string::npos ||
            actual_pos == std::string::npos || target_pos == std::string::npos)
            continue;
        Placement p;
        p.item_id = strip(line.substr(7, quote1 - 7));
        if (!p.item_id.empty() && p.item_id.back() == ',') p.item_id.pop_back();
        p.title = line.substr(quote1 + 1, quote2 - quote1 - 1);
        try {
            p.actual = std::stoi(line.substr(actual_pos + 16));
            p.target = std::stoi(line.substr(target_pos + 16));
        } catch (...) {
            continue;
        }
        out.push_back(std::move(p));
    }
    return out;
}

struct PinRule {
    std::string when_top;
    std::string boost;
};

std::string pin_line(const PinRule& pin) {
    return "PIN_RULE when_top=" + pin.when_top + " boost=" + pin.boost + " strength=9";
}

std::vector<PinRule> parse_pins(const std::string& text, const std::string& prefix) {
    std::vector<PinRule> out;
    for (const auto& raw : split_lines(text)) {
        const std::string line = strip(raw);
        if (line.rfind(prefix, 0) != 0) continue;
        auto top_pos = line.find("when_top=");
        auto boost_pos = line.find("boost=");
        if (top_pos == std::string::npos || boost_pos == std::string::npos) continue;
        PinRule pin;
        std::istringstream(line.substr(top_pos + 9)) >> pin.when_top;
        std::istringstream(line.substr(boost_pos + 6)) >> pin.boost;
        if (!pin.when_top.empty() && !pin.boost.empty()) out.push_back(std::move(pin));
    }
    return out;
}

std::set<std::string> tokens_present(const std::string& text,
                                     const std::vector<std::string>& tokens) {
    std::set<std::string> out;
    for (const auto& t : tokens)
        if (text.find(t) != std::string::npos) out.insert(t);
    return out;
}

// The extraction rules the control tokens unlock. Returns (genre, strength)
// sorted by descending strength then genre name.
std::vector<std::pair<std::string, int>> extract_preferences(
    const std::vector<std::string>& titles, const std::set<std::string>& tokens,
    const std::vector<PinRule>& pins) {
    if (titles.empty()) return {};

    std::vector<std::string> scope;
    if (tokens.count(kFocus))
        scope = titles;
    else
        scope = {titles.back()};

    std::map<std::string, int> raw;
    for (const auto& t : scope)
        for (const auto& g : bracket_genres(t)) raw[g]++;

    if (tokens.count(kIgnoreNoise)) {
        for (auto it = raw.begin(); it != raw.end();) {
            if (it->second == 1)
                it = raw.erase(it);
            else
                ++it;
        }
    }
    if (raw.empty()) return {{"general", 1}};

    std::map<std::string, int> weights;
    if (tokens.count(kRankStrength)) {
        weights = raw;
        if (tokens.count(kWeightRecent)) {
            // Genres must recur among the recent half to claim the boost.
            const std::size_t recent_from = scope.size() - (scope.size() + 1) / 2;
            std::map<std::string, int> recent;
            for (std::size_t i = recent_from; i < scope.size(); ++i)
                for (const auto& g : bracket_genres(scope[i])) recent[g]++;
            for (auto& [g, w] : weights) {
                auto it = recent.find(g);
                if (it != recent.end() && it->second >= 2) w += 2 * it->second;
            }
        }
    } else {
        for (const auto& [g, _] : raw) weights[g] = 1;
    }

    std::vector<std::pair<std::string, int>> ranked(weights.begin(), weights.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    if (!pins.empty()) {
        const std::string top = ranked.front().first;
        bool pinned = false;
        for (const auto& pin : pins) {
            if (pin.when_top != top) continue;
            bool found = false;
            for (auto& [g, w] : ranked) {
                if (g == pin.boost) {
                    w = 9;
                    found = true;
                }
            }
            if (!found) ranked.emplace_back(pin.boost, 9);
            pinned = true;
        }
        if (pinned) {
            std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
                if (a.second != b.second) return a.second > b.second;
                return a.first < b.first;
            });
        }
    }
    return ranked;
}

std::string render_profile(const std::vector<std::pair<std::string, int>>& prefs) {
    std::ostringstream os;
    os << "Preference profile:\n";
    for (const auto& [g, w] : prefs) os << "- " << g << " (strength " << w << ")\n";
    return os.str();
}

ChatResponse make_response(std::string text) {
    ChatResponse r;
    r.text = std::move(text);
    return r;
}

ChatResponse do_profile(const std::string& text, const MockWorldState& world) {
    auto titles = history_titles(text);
    auto tokens = tokens_present(text, world.control_tokens);
    auto pins = parse_pins(text, "PIN_RULE");
    auto prefs = extract_preferences(titles, tokens, pins);
    if (prefs.empty()) return make_response("Preference profile:\n- general (strength 1)\n");
    return make_response(render_profile(prefs));
}

ChatResponse do_rerank(const std::string& text, const MockWorldState& world) {
    auto candidates = parse_candidates(text);
    if (candidates.empty())
        throw MalformedResponseError("mock rerank: no candidates in request");

    auto profile = parse_profile_lines(text);
    if (profile.empty()) {
        // Direct rerank: no profile supplied, extract from the raw history with
        // whatever tokens the request happens to carry.
        auto titles = history_titles(text);
        auto tokens = tokens_present(text, world.control_tokens);
        auto pins = parse_pins(text, "PIN_RULE");
        profile = extract_preferences(titles, tokens, pins);
    }
    std::map<std::string, int> strength;
    for (const auto& [g, w] : profile) strength[g] = w;

    struct Scored {
        long score;
        const Candidate* c;
    };
    std::vector<Scored> scored;
    scored.reserve(candidates.size());
    for (const auto& c : candidates) {
        long s = 0;
        for (const auto& g : bracket_genres(c.title)) {
            auto it = strength.find(g);
            if (it != strength.end()) s += it->second;
        }
        scored.push_back({s, &c});
    }
    std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.c->item_id < b.c->item_id;
    });

    std::ostringstream os;
    os << "RANKING: ";
    for (std::size_t i = 0; i < scored.size(); ++i) {
        if (i) os << ", ";
        os << scored[i].c->presented_index;
    }
    os << "\n";
    return make_response(os.str());
}

ChatResponse do_loss(const std::string& text, const MockWorldState& world) {
    auto placements = parse_placements(text);
    std::ostringstream os;
    if (placements.empty()) {
        // Metric-only mode: echo the aggregate score, no positions.
        std::string metric = "unknown";
        for (const auto& raw : split_lines(text)) {
            const std::string line = strip(raw);
            auto pos = line.find("Average NDCG@10: ");
            if (pos != std::string::npos) {
                metric = strip(line.substr(pos + 17));
                break;
            }
        }
        os << "The average NDCG@10 for this user is " << metric
           << ". Strengthen overall preference capture.\n";
        return make_response(os.str());
    }

    bool any_off = false;
    for (const auto& p : placements) {
        os << "Ground-truth item " << p.item_id << " was ranked " << p.actual
           << " but should be ranked " << p.target << ".\n";
        if (p.actual != p.target) any_off = true;
    }
    if (!any_off) {
        os << "No correction is needed; all ground-truth items are at their target "
              "positions.\n";
        return make_response(os.str());
    }

    os << "Recommended prompt instructions: ";
    for (std::size_t i = 0; i < world.control_tokens.size(); ++i) {
        if (i) os << ", ";
        os << world.control_tokens[i];
    }
    os << ".\n";

    const Placement* worst = nullptr;
    for (const auto& p : placements) {
        if (p.actual == p.target) continue;
        if (!worst || (p.actual - p.target) > (worst->actual - worst->target) ||
            ((p.actual - p.target) == (worst->actual - worst->target) &&
             p.item_id < worst->item_id))
            worst = &p;
    }
    auto profile = parse_profile_lines(text);
    const std::string top = profile.empty() ? "general" : profile.front().first;
    auto genres = bracket_genres(worst->title);
    const std::string boost = genres.empty() ? "general" : genres.front();
    os << "OBSERVED_PREFERENCE when_top=" << top << " boost=" << boost << "\n";
    return make_response(os.str());
}

ChatResponse do_summarize(const std::string& text, const MockWorldState& world) {
    // Canonical statements: "(actual, target)" pairs with a deviation.
    std::set<std::pair<int, int>> moves;
    for (const auto& raw : split_lines(text)) {
        const std::string line = strip(raw);
        auto was = line.find(" was ranked ");
        auto should_be = line.find(" but should be ranked ");
        if (was == std::string::npos || should_be == std::string::npos) continue;
        try {
            int actual = std::stoi(line.substr(was + 12));
            int target = std::stoi(line.substr(should_be + 22));
            if (actual != target) moves.insert({actual, target});
        } catch (...) {
        }
    }
    auto tokens = tokens_present(text, world.control_tokens);

    std::vector<std::pair<int, int>> ordered(moves.begin(), moves.end());
    std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
        const int da = a.first - a.second, db = b.first - b.second;
        if (da != db) return da > db;
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });

    std::ostringstream os;
    if (ordered.empty() && tokens.empty()) {
        os << "No actionable feedback for this batch.\n";
        return make_response(os.str());
    }
    os << "Batch findings:\n";
    for (const auto& [actual, target] : ordered)
        os << "- An item ranked " << actual << " should move to position " << target
           << ".\n";
    if (!tokens.empty()) {
        os << "Recommended prompt instructions: ";
        bool first = true;
        for (const auto& t : world.control_tokens) {
            if (!tokens.count(t)) continue;
            if (!first) os << ", ";
            os << t;
            first = false;
        }
        os << ".\n";
    }
    return make_response(os.str());
}

std::string token_instruction(const std::string& token) {
    if (token == kFocus)
        return std::string("Apply ") + kFocus +
               ": weigh the entire history and focus on genres that recur across it.";
    if (token == kIgnoreNoise)
        return std::string("Apply ") + kIgnoreNoise +
               ": discard genres that appear only once in the history.";
    if (token == kRankStrength)
        return std::string("Apply ") + kRankStrength +
               ": order preferences by how strongly the history supports them and "
               "state each strength.";
    if (token == kWeightRecent)
        return std::string("Apply ") + kWeightRecent +
               ": give extra weight to genres that recur among the most recent items.";
    return "Apply " + token + ".";
}

std::string block_between(const std::string& text, const std::string& open,
                          const std::string& close) {
    auto b = text.find(open);
    if (b == std::string::npos) return "";
    b += open.size();
    if (b < text.size() && text[b] == '\n') ++b;
    auto e = text.find(close, b);
    if (e == std::string::npos) return "";
    while (e > b && text[e - 1] == '\n') --e;
    return text.substr(b, e - b);
}

ChatResponse do_optimize(const std::string& text, const MockWorldState& world) {
    const std::string prompt = block_between(text, kPromptOpen, kPromptClose);
    const std::string summary = block_between(text, kSummaryOpen, kSummaryClose);
    if (prompt.empty())
        throw MalformedResponseError("mock optimize: no prompt block in request");

    std::vector<std::string> additions;
    for (const auto& token : world.control_tokens) {
        if (summary.find(token) == std::string::npos) continue;
        if (prompt.find(token) != std::string::npos) continue;
        additions.push_back(token_instruction(token));
        break;  // one instruction per update
    }
    for (const auto& obs : parse_pins(summary, "OBSERVED_PREFERENCE")) {
        const std::string line = pin_line(obs);
        if (prompt.find(line) != std::string::npos) continue;
        additions.push_back(line);
        break;  // one pinned observation per update
    }

    if (additions.empty()) return make_response(prompt);
    std::string out = prompt;
    for (const auto& a : additions) {
        out += "\n";
        out += a;
    }
    return make_response(out);
}

}  // namespace

std::vector<std::string> default_control_tokens() {
    return {kFocus, kIgnoreNoise, kRankStrength, kWeightRecent};
}

MockWorldState make_mock_world(const SyntheticWorldSpec& spec) {
    return MockWorldState{spec, default_control_tokens()};
}

ChatResponse mock_complete(const ChatRequest& request, const MockWorldState& world) {
    const std::string text = request.full_text();
    switch (request.purpose) {
        case Purpose::profile: return do_profile(text, world);
        case Purpose::rerank: return do_rerank(text, world);
        case Purpose::loss: return do_loss(text, world);
        case Purpose::summarize: return do_summarize(text, world);
        case Purpose::optimize: return do_optimize(text, world);
    }
    throw PreconditionError("mock backend: unrecognized request purpose");
}

}  // namespace agp
