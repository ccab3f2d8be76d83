#include "agp/profile.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "agp/errors.hpp"
#include "agp/prompts.hpp"

namespace agp {

namespace fs = std::filesystem;
using nlohmann::json;

PromptState seed_prompt(const std::string& template_name_or_path) {
    PromptState p;
    p.version = 0;
    p.created_by = PromptState::Origin::seed;
    if (template_name_or_path == "default") {
        p.text = default_seed_prompt_text();
        p.note = "built-in default template";
        return p;
    }
    std::ifstream f(template_name_or_path);
    if (!f)
        throw ConfigError("seed prompt template not found: " + template_name_or_path);
    std::ostringstream os;
    os << f.rdbuf();
    p.text = os.str();
    p.note = "seed template from " + template_name_or_path;
    return p;
}

ChatRequest render_profile_request(const UserRecord& user, const PromptState& prompt) {
    ChatRequest req;
    req.purpose = Purpose::profile;
    req.messages.push_back({"system", prompt.text});
    req.messages.push_back({"user", render_history_block(user.history)});
    return req;
}

UserProfile generate_profile(const UserRecord& user, const PromptState& prompt,
                             Gateway& gateway) {
    if (user.history.empty())
        throw PreconditionError("generate_profile: user " + user.user_id +
                                " has an empty history");
    ChatResponse resp = gateway.complete(render_profile_request(user, prompt));
    if (resp.text.find_first_not_of(" \t\r\n") == std::string::npos)
        throw GatewayError("generate_profile: empty response for user " + user.user_id);
    return UserProfile{user.user_id, resp.text, prompt.version};
}

void save_prompt_checkpoint(const PromptState& prompt, const std::string& dir) {
    fs::create_directories(dir);
    const fs::path file = fs::path(dir) / ("prompt_v" + std::to_string(prompt.version) + ".txt");
    std::ofstream pf(file);
    if (!pf) throw DataError("cannot write prompt checkpoint: " + file.string());
    pf << prompt.text;

    json j;
    j["version"] = prompt.version;
    if (prompt.parent_version)
        j["parent_version"] = *prompt.parent_version;
    else
        j["parent_version"] = nullptr;
    j["created_by"] = prompt.created_by == PromptState::Origin::seed ? "seed" : "optimizer";
    j["note"] = prompt.note;
    std::ofstream idx(fs::path(dir) / "lineage.jsonl", std::ios::app);
    if (!idx) throw DataError("cannot write lineage index in " + dir);
    idx << j.dump() << "\n";
}

std::vector<PromptState> load_prompt_lineage(const std::string& dir) {
    const fs::path idx_path = fs::path(dir) / "lineage.jsonl";
    std::ifstream idx(idx_path);
    if (!idx) throw DataError("no lineage index at " + idx_path.string());
    std::vector<PromptState> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(idx, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError(idx_path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
        PromptState p;
        p.version = j.at("version").get<int>();
        if (!j.at("parent_version").is_null())
            p.parent_version = j["parent_version"].get<int>();
        p.created_by = j.value("created_by", "seed") == std::string("optimizer")
                           ? PromptState::Origin::optimizer
                           : PromptState::Origin::seed;
        p.note = j.value("note", std::string{});
        const fs::path file = fs::path(dir) / ("prompt_v" + std::to_string(p.version) + ".txt");
        std::ifstream pf(file);
        if (!pf) throw DataError("missing prompt checkpoint: " + file.string());
        std::ostringstream os;
        os << pf.rdbuf();
        p.text = os.str();
        out.push_back(std::move(p));
    }
    // A version may be re-recorded if a run was resumed; keep the last entry.
    std::sort(out.begin(), out.end(),
              [](const PromptState& a, const PromptState& b) { return a.version < b.version; });
    std::vector<PromptState> deduped;
    for (auto& p : out) {
        if (!deduped.empty() && deduped.back().version == p.version)
            deduped.back() = std::move(p);
        else
            deduped.push_back(std::move(p));
    }
    return deduped;
}

}  // namespace agp
