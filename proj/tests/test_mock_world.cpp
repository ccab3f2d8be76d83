#include <doctest.h>

#include "agp/gateway.hpp"
#include "agp/mock_world.hpp"
#include "helpers.hpp"

using namespace agp;
using namespace agp::test;

namespace {

MockWorldState world() { return make_mock_world(small_world_spec(1, 4)); }

ChatRequest request(Purpose purpose, const std::string& user_content,
                    const std::string& system_content = "s") {
    ChatRequest req;
    req.purpose = purpose;
    req.messages.push_back({"system", system_content});
    req.messages.push_back({"user", user_content});
    return req;
}

}  // namespace

TEST_CASE("profile extraction lists genres by frequency") {
    // Full-fidelity prompt: whole-history scope plus graded strengths.
    const std::string prompt =
        "Build a profile. FOCUS_RECURRING_GENRES RANK_BY_PREFERENCE_STRENGTH";
    const std::string history =
        "Interaction history (oldest first):\n"
        "1. A [fantasy]\n2. B [fantasy]\n3. C [noir]\n4. D [fantasy]\n5. E [fantasy]\n";
    auto resp = mock_complete(request(Purpose::profile, history, prompt), world());
    auto fantasy = resp.text.find("fantasy");
    auto noir = resp.text.find("noir");
    REQUIRE(fantasy != std::string::npos);
    REQUIRE(noir != std::string::npos);
    CHECK(fantasy < noir);
    CHECK(resp.text.find("- fantasy (strength 4)") != std::string::npos);
    CHECK(resp.text.find("- noir (strength 1)") != std::string::npos);
}

TEST_CASE("profile extraction without tokens reads only the last title") {
    const std::string history =
        "Interaction history (oldest first):\n"
        "1. A [fantasy]\n2. B [fantasy]\n3. C [noir]\n";
    auto resp = mock_complete(request(Purpose::profile, history), world());
    CHECK(resp.text.find("noir") != std::string::npos);
    CHECK(resp.text.find("fantasy") == std::string::npos);
}

TEST_CASE("noise-singleton genres are dropped with IGNORE_NOISE_TITLES") {
    const std::string prompt = "FOCUS_RECURRING_GENRES IGNORE_NOISE_TITLES";
    const std::string history =
        "Interaction history (oldest first):\n"
        "1. A [fantasy]\n2. B [fantasy]\n3. C [noir]\n";
    auto resp = mock_complete(request(Purpose::profile, history, prompt), world());
    CHECK(resp.text.find("fantasy") != std::string::npos);
    CHECK(resp.text.find("noir") == std::string::npos);
}

TEST_CASE("rerank orders candidates by profile overlap with id tie-break") {
    const std::string content =
        "User profile:\n- fantasy (strength 3)\n\n"
        "Candidates:\n"
        "[1] B [noir] (id:iB)\n"
        "[2] A [fantasy] (id:iA)\n"
        "[3] C [fantasy] (id:iC)\n";
    auto resp = mock_complete(request(Purpose::rerank, content), world());
    // A and C tie on score; A wins by id; B scores zero and goes last.
    CHECK(resp.text.find("RANKING: 2, 3, 1") != std::string::npos);
}

TEST_CASE("rerank without a profile extracts from raw history at base fidelity") {
    const std::string content =
        "Interaction history (oldest first):\n"
        "1. A [fantasy]\n2. B [noir]\n\n"
        "Candidates:\n"
        "[1] X [fantasy] (id:iX)\n"
        "[2] Y [noir] (id:iY)\n";
    auto resp = mock_complete(request(Purpose::rerank, content), world());
    // Last title is noir, so the noir candidate leads.
    CHECK(resp.text.find("RANKING: 2, 1") != std::string::npos);
}

TEST_CASE("loss verbalizes every pair and recommends tokens when off target") {
    const std::string content =
        "User profile:\n- fantasy (strength 3)\n\n"
        "Ground-truth placements:\n"
        "- item i9 \"G [fantasy]\": actual position 3, target position 1\n";
    auto resp = mock_complete(request(Purpose::loss, content), world());
    CHECK(resp.text.find("ranked 3") != std::string::npos);
    CHECK(resp.text.find("ranked 1") != std::string::npos);
    CHECK(resp.text.find("FOCUS_RECURRING_GENRES") != std::string::npos);
    CHECK(resp.text.find("OBSERVED_PREFERENCE when_top=fantasy boost=fantasy") !=
          std::string::npos);
}

TEST_CASE("loss reports no correction when everything is on target") {
    const std::string content =
        "User profile:\n- fantasy (strength 3)\n\n"
        "Ground-truth placements:\n"
        "- item i9 \"G [fantasy]\": actual position 1, target position 1\n";
    auto resp = mock_complete(request(Purpose::loss, content), world());
    CHECK(resp.text.find("No correction is needed") != std::string::npos);
    CHECK(resp.text.find("FOCUS_RECURRING_GENRES") == std::string::npos);
    CHECK(resp.text.find("OBSERVED_PREFERENCE") == std::string::npos);
}

TEST_CASE("metric-only loss carries the score and no position statements") {
    const std::string content = "User profile:\n- fantasy (strength 3)\n\nAverage NDCG@10: 0.500\n";
    auto resp = mock_complete(request(Purpose::loss, content), world());
    CHECK(resp.text.find("0.500") != std::string::npos);
    CHECK(resp.text.find("ranked") == std::string::npos);
    CHECK(resp.text.find("OBSERVED_PREFERENCE") == std::string::npos);
    CHECK(resp.text.find("FOCUS_RECURRING_GENRES") == std::string::npos);
}

TEST_CASE("summarize emits each statement once, canonically ordered") {
    const std::string content =
        "[HIGH weight=1.000] user=u1\n"
        "Ground-truth item i1 was ranked 5 but should be ranked 2.\n"
        "Recommended prompt instructions: FOCUS_RECURRING_GENRES.\n---\n"
        "[MED weight=0.300] user=u2\n"
        "Ground-truth item i7 was ranked 5 but should be ranked 2.\n"
        "Ground-truth item i8 was ranked 9 but should be ranked 1.\n"
        "OBSERVED_PREFERENCE when_top=noir boost=western\n---\n";
    auto resp = mock_complete(request(Purpose::summarize, content), world());
    // duplicate (5, 2) statements collapse into one line
    auto first = resp.text.find("ranked 5 should move to position 2");
    REQUIRE(first != std::string::npos);
    CHECK(resp.text.find("ranked 5 should move to position 2", first + 1) == std::string::npos);
    // largest displacement first
    CHECK(resp.text.find("ranked 9") < first);
    CHECK(resp.text.find("FOCUS_RECURRING_GENRES") != std::string::npos);
    // per-user observations are filtered out by summarization
    CHECK(resp.text.find("OBSERVED_PREFERENCE") == std::string::npos);
}

TEST_CASE("optimize appends exactly the highest-priority missing token") {
    const std::string content =
        "Current prompt:\n<<<PROMPT\nBe helpful.\nPROMPT>>>\n\n"
        "Batch feedback summary:\n<<<SUMMARY\n"
        "Recommended prompt instructions: IGNORE_NOISE_TITLES, FOCUS_RECURRING_GENRES.\n"
        "SUMMARY>>>\n\nUpdate intensity: moderate\n";
    auto resp = mock_complete(request(Purpose::optimize, content), world());
    CHECK(resp.text.rfind("Be helpful.", 0) == 0);
    CHECK(resp.text.find("FOCUS_RECURRING_GENRES") != std::string::npos);
    CHECK(resp.text.find("IGNORE_NOISE_TITLES") == std::string::npos);
}

TEST_CASE("optimize returns the prompt unchanged when nothing is missing") {
    const std::string content =
        "Current prompt:\n<<<PROMPT\nBe helpful.\nApply FOCUS_RECURRING_GENRES: x.\nPROMPT>>>\n\n"
        "Batch feedback summary:\n<<<SUMMARY\n"
        "Recommended prompt instructions: FOCUS_RECURRING_GENRES.\nSUMMARY>>>\n";
    auto resp = mock_complete(request(Purpose::optimize, content), world());
    CHECK(resp.text == "Be helpful.\nApply FOCUS_RECURRING_GENRES: x.");
}

TEST_CASE("optimize pins one observed preference from raw feedback") {
    const std::string content =
        "Current prompt:\n<<<PROMPT\nBe helpful.\nPROMPT>>>\n\n"
        "Batch feedback summary:\n<<<SUMMARY\n"
        "OBSERVED_PREFERENCE when_top=fantasy boost=noir\n"
        "OBSERVED_PREFERENCE when_top=scifi boost=drama\n"
        "SUMMARY>>>\n";
    auto resp = mock_complete(request(Purpose::optimize, content), world());
    CHECK(resp.text.find("PIN_RULE when_top=fantasy boost=noir strength=9") != std::string::npos);
    CHECK(resp.text.find("when_top=scifi") == std::string::npos);
}

TEST_CASE("pinned rules boost the named genre when the top matches") {
    const std::string prompt =
        "FOCUS_RECURRING_GENRES RANK_BY_PREFERENCE_STRENGTH\n"
        "PIN_RULE when_top=fantasy boost=noir strength=9";
    const std::string history =
        "Interaction history (oldest first):\n"
        "1. A [fantasy]\n2. B [fantasy]\n3. C [noir]\n4. D [fantasy]\n";
    auto resp = mock_complete(request(Purpose::profile, history, prompt), world());
    CHECK(resp.text.find("- noir (strength 9)") != std::string::npos);
}

TEST_CASE("mock responses are identical for identical inputs") {
    const std::string history =
        "Interaction history (oldest first):\n1. A [fantasy]\n2. B [noir]\n";
    auto r1 = mock_complete(request(Purpose::profile, history), world());
    auto r2 = mock_complete(request(Purpose::profile, history), world());
    CHECK(r1.text == r2.text);
}
