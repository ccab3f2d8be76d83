#pragma once
// The shared profile-generation prompt and per-user profile generation.

#include <optional>
#include <string>
#include <vector>

#include "agp/dataset.hpp"
#include "agp/gateway.hpp"

namespace agp {

struct PromptState {
    std::string text;
    int version = 0;
    std::optional<int> parent_version;
    enum class Origin { seed, optimizer } created_by = Origin::seed;
    std::string note;
};

struct UserProfile {
    std::string user_id;
    std::string text;
    int prompt_version = 0;
};

// Version-0 prompt from the built-in "default" template or a file path.
PromptState seed_prompt(const std::string& template_name_or_path);

// Renders the profile request: system message carries the prompt text, the
// user message the numbered history titles (most recent last).
ChatRequest render_profile_request(const UserRecord& user, const PromptState& prompt);

// Issues exactly one profile call and tags the result with the prompt version.
UserProfile generate_profile(const UserRecord& user, const PromptState& prompt,
                             Gateway& gateway);

// Prompt checkpointing: prompts/prompt_v{N}.txt plus a line-delimited lineage
// index {version, parent_version, created_by, note}.
void save_prompt_checkpoint(const PromptState& prompt, const std::string& dir);
std::vector<PromptState> load_prompt_lineage(const std::string& dir);

}  // namespace agp
