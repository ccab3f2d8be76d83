#include "agp/prompts.hpp"

#include <sstream>

namespace agp {

std::string render_history_block(const std::vector<InteractionRecord>& history) {
    std::ostringstream os;
    os << "Interaction history (oldest first):\n";
    for (std::size_t i = 0; i < history.size(); ++i)
        os << (i + 1) << ". " << history[i].title << "\n";
    return os.str();
}

std::string render_candidates_block(const std::vector<RankedItem>& items) {
    std::ostringstream os;
    os << "Candidates:\n";
    for (std::size_t i = 0; i < items.size(); ++i)
        os << "[" << (i + 1) << "] " << items[i].title << " (id:" << items[i].item_id << ")\n";
    return os.str();
}

std::string default_seed_prompt_text() {
    return
        "You are building a preference profile for one user of a recommendation "
        "service.\n"
        "Read the interaction history (oldest first) and produce a short, structured "
        "profile:\n"
        "- list the themes or genres the user gravitates toward, one per line, as "
        "\"- <theme> (strength <integer>)\", strongest first\n"
        "- note clear shifts toward recent interests\n"
        "- keep the profile under ten lines and do not repeat the history verbatim\n";
}

std::string rerank_system_prompt() {
    return
        "You rerank recommendation candidates for one user. Respond with a single "
        "line \"RANKING: i1, i2, ...\" listing every candidate index exactly once, "
        "best match first.\n";
}

std::string cot_preamble() {
    return
        "Think step by step about the user's preferences before answering. After "
        "your reasoning, output the final line as \"RANKING: ...\".\n";
}

std::string loss_system_prompt() {
    return
        "You diagnose why a preference profile failed to place ground-truth items "
        "at their target positions. Mention every actual and target position, and "
        "recommend prompt instructions when a correction is needed.\n";
}

std::string optimize_system_prompt() {
    return
        "You revise a profile-generation prompt using batch feedback. Respond with "
        "the complete revised prompt text and nothing else. Respect the stated "
        "update intensity and edit budget.\n";
}

}  // namespace agp
