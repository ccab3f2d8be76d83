#pragma once
// Shared request scaffolding: the text blocks all call sites render and the
// deterministic mock parses.

#include <string>
#include <vector>

#include "agp/dataset.hpp"

namespace agp {

// Block delimiters used by the prompt-update request so the current prompt
// and the feedback summary are unambiguous to the model.
inline constexpr const char* kPromptOpen = "<<<PROMPT";
inline constexpr const char* kPromptClose = "PROMPT>>>";
inline constexpr const char* kSummaryOpen = "<<<SUMMARY";
inline constexpr const char* kSummaryClose = "SUMMARY>>>";

// "Interaction history (oldest first):" followed by numbered titles,
// most recent last.
std::string render_history_block(const std::vector<InteractionRecord>& history);

// "Candidates:" followed by "[i] <title> (id:<item_id>)" lines in list order.
std::string render_candidates_block(const std::vector<RankedItem>& items);

// Built-in seed profile-generation prompt (version 0).
std::string default_seed_prompt_text();

std::string rerank_system_prompt();
std::string cot_preamble();
std::string loss_system_prompt();
std::string optimize_system_prompt();

}  // namespace agp
