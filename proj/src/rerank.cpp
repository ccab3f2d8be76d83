#include "agp/rerank.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "agp/errors.hpp"
#include "agp/prompts.hpp"

namespace agp {

using nlohmann::json;

const char* mode_name(RerankMode mode) {
    switch (mode) {
        case RerankMode::agp: return "agp";
        case RerankMode::dir: return "dir";
        case RerankMode::cot: return "cot";
        case RerankMode::base: return "base";
    }
    return "unknown";
}

RerankMode mode_from_string(const std::string& name) {
    if (name == "agp") return RerankMode::agp;
    if (name == "dir") return RerankMode::dir;
    if (name == "cot") return RerankMode::cot;
    if (name == "base") return RerankMode::base;
    throw ConfigError("unknown rerank mode: " + name);
}

namespace {

std::string strip(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string normalized(const std::string& s) {
    std::string out;
    bool space = false;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            space = !out.empty();
            continue;
        }
        if (space) out += ' ';
        space = false;
        out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) lines.push_back(line);
    return lines;
}

// Matches the whole string as a positive integer.
bool parse_int(const std::string& s, int& out) {
    if (s.empty()) return false;
    for (char c : s)
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    try {
        out = std::stoi(s);
    } catch (...) {
        return false;
    }
    return true;
}

// Strips an enumeration prefix like "3.", "3)", "(3)" or "[3]" and returns
// the remaining content. The prefix number itself is an output position, not
// a candidate reference.
std::string strip_enumeration(const std::string& line) {
    std::string s = strip(line);
    std::size_t i = 0;
    if (i < s.size() && (s[i] == '(' || s[i] == '[')) ++i;
    std::size_t digits_start = i;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
    if (i == digits_start) return s;
    if (i < s.size() && (s[i] == '.' || s[i] == ')' || s[i] == ']')) {
        ++i;
        return strip(s.substr(i));
    }
    return s;
}

// Resolves a content fragment against the candidate set; -1 when unknown.
int resolve_entry(const std::string& content, const BaselineRanking& baseline,
                  const std::vector<std::string>& normalized_titles) {
    const int k = static_cast<int>(baseline.items.size());
    int idx = 0;
    if (parse_int(content, idx)) return (idx >= 1 && idx <= k) ? idx - 1 : -1;

    const std::string norm = normalized(content);
    if (norm.empty()) return -1;
    // exact id reference
    for (int i = 0; i < k; ++i)
        if (content == baseline.items[i].item_id) return i;
    // exact title
    for (int i = 0; i < k; ++i)
        if (norm == normalized_titles[i]) return i;
    // the content contains exactly one candidate title
    int found = -1;
    for (int i = 0; i < k; ++i) {
        if (norm.find(normalized_titles[i]) != std::string::npos) {
            if (found >= 0) return -1;
            found = i;
        }
    }
    if (found >= 0) return found;
    // the content is an unambiguous fragment of one title
    if (norm.size() >= 4) {
        for (int i = 0; i < k; ++i) {
            if (normalized_titles[i].find(norm) != std::string::npos) {
                if (found >= 0) return -1;
                found = i;
            }
        }
    }
    return found;
}

}  // namespace

ParsedRanking parse_ranking(const std::string& response_text, const BaselineRanking& baseline) {
    const int k = static_cast<int>(baseline.items.size());
    if (k == 0) throw PreconditionError("parse_ranking: empty baseline");

    std::vector<std::string> normalized_titles;
    normalized_titles.reserve(baseline.items.size());
    for (const auto& it : baseline.items) normalized_titles.push_back(normalized(it.title));

    bool rule_fired = false;
    std::vector<int> order;

    // Preferred form: the last "RANKING:"/"FINAL:" line with candidate indices.
    const auto lines = split_lines(response_text);
    std::string ranking_line;
    for (const auto& raw : lines) {
        const std::string line = strip(raw);
        auto pos = line.find("RANKING:");
        if (pos == std::string::npos) pos = line.find("FINAL:");
        if (pos != std::string::npos) ranking_line = line.substr(line.find(':', pos) + 1);
    }
    if (!ranking_line.empty()) {
        std::string num;
        auto flush = [&] {
            if (num.empty()) return;
            int v = 0;
            if (parse_int(num, v) && v >= 1 && v <= k)
                order.push_back(v - 1);
            else
                rule_fired = true;  // unknown entry dropped
            num.clear();
        };
        for (char c : ranking_line) {
            if (std::isdigit(static_cast<unsigned char>(c)))
                num += c;
            else
                flush();
        }
        flush();
    }

    if (order.empty()) {
        for (const auto& raw : lines) {
            const std::string line = strip(raw);
            if (line.empty()) continue;
            const std::string content = strip_enumeration(line);
            if (content.empty()) continue;
            int idx = resolve_entry(content, baseline, normalized_titles);
            if (idx >= 0)
                order.push_back(idx);
            else
                rule_fired = true;
        }
    }

    // Deduplicate keeping the first occurrence.
    std::vector<int> deduped;
    std::set<int> seen;
    for (int idx : order) {
        if (seen.insert(idx).second)
            deduped.push_back(idx);
        else
            rule_fired = true;
    }

    if (static_cast<int>(deduped.size()) * 2 < k)
        throw UnparseableRankingError(
            "could not recognize at least half of the baseline items in the response");

    // Append missing items in their original relative order.
    if (static_cast<int>(deduped.size()) < k) {
        rule_fired = true;
        for (int i = 0; i < k; ++i)
            if (!seen.count(i)) deduped.push_back(i);
    }

    ParsedRanking out;
    out.repaired = rule_fired;
    out.items.reserve(deduped.size());
    for (int idx : deduped) out.items.push_back(baseline.items[idx].item_id);
    return out;
}

namespace {

void verify_permutation(const RerankedList& list, const BaselineRanking& baseline) {
    std::multiset<std::string> got(list.items.begin(), list.items.end());
    std::multiset<std::string> want;
    for (const auto& it : baseline.items) want.insert(it.item_id);
    if (got != want)
        throw DataError("reranked list for " + list.user_id +
                        " is not a permutation of its baseline");
}

RerankedList finish(const std::string& user_id, ParsedRanking parsed, RerankMode mode,
                    int prompt_version, const BaselineRanking& baseline) {
    RerankedList out;
    out.user_id = user_id;
    out.items = std::move(parsed.items);
    out.mode = mode;
    out.repair_applied = parsed.repaired;
    out.prompt_version = prompt_version;
    verify_permutation(out, baseline);
    return out;
}

}  // namespace

RerankedList rerank_with_profile(const UserProfile& profile, const BaselineRanking& baseline,
                                 Gateway& gateway) {
    if (baseline.items.empty())
        throw PreconditionError("rerank_with_profile: empty baseline");
    if (profile.user_id != baseline.user_id)
        throw PreconditionError("rerank_with_profile: profile user " + profile.user_id +
                                " does not match ranking user " + baseline.user_id);
    ChatRequest req;
    req.purpose = Purpose::rerank;
    req.messages.push_back({"system", rerank_system_prompt()});
    req.messages.push_back(
        {"user", "User profile:\n" + profile.text + "\n\n" + render_candidates_block(baseline.items)});
    ChatResponse resp = gateway.complete(req);
    return finish(baseline.user_id, parse_ranking(resp.text, baseline), RerankMode::agp,
                  profile.prompt_version, baseline);
}

RerankedList rerank_direct(const UserRecord& user, const BaselineRanking& baseline,
                           RerankMode mode, Gateway& gateway) {
    if (baseline.items.empty()) throw PreconditionError("rerank_direct: empty baseline");
    if (user.user_id != baseline.user_id)
        throw PreconditionError("rerank_direct: user mismatch");
    if (mode != RerankMode::dir && mode != RerankMode::cot)
        throw PreconditionError("rerank_direct: mode must be dir or cot");
    ChatRequest req;
    req.purpose = Purpose::rerank;
    std::string system = rerank_system_prompt();
    if (mode == RerankMode::cot) system = cot_preamble() + system;
    req.messages.push_back({"system", std::move(system)});
    req.messages.push_back(
        {"user", render_history_block(user.history) + "\n" + render_candidates_block(baseline.items)});
    ChatResponse resp = gateway.complete(req);
    return finish(baseline.user_id, parse_ranking(resp.text, baseline), mode, -1, baseline);
}

RerankedList rerank_base(const BaselineRanking& baseline) {
    if (baseline.items.empty()) throw PreconditionError("rerank_base: empty baseline");
    RerankedList out;
    out.user_id = baseline.user_id;
    for (const auto& it : baseline.items) out.items.push_back(it.item_id);
    out.mode = RerankMode::base;
    return out;
}

void append_reranked(const RerankedList& list, const std::string& path) {
    std::ofstream f(path, std::ios::app);
    if (!f) throw DataError("cannot write reranked log: " + path);
    json j;
    j["user_id"] = list.user_id;
    j["mode"] = mode_name(list.mode);
    j["items"] = list.items;
    j["repair_applied"] = list.repair_applied;
    j["prompt_version"] = list.prompt_version;
    f << j.dump() << "\n";
}

}  // namespace agp
