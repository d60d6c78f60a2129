#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "qrag/knowledge.hpp"
#include "qrag/retrieve.hpp"

namespace qrag {

// The four template placeholders, each required exactly once.
inline constexpr std::string_view kSlotSimilarQuestions = "{similar questions}";
inline constexpr std::string_view kSlotWebTitles = "{web titles}";
inline constexpr std::string_view kSlotEntityDetails = "{entity details}";
inline constexpr std::string_view kSlotQuery = "{query}";

// Literal line preceding the {query} slot in the shipped templates. Mock
// backends locate the query in a rendered prompt by this marker.
inline constexpr std::string_view kQueryMarker = "User's Original Query:";

inline constexpr std::string_view kEmptySlotMarker = "(none)";

struct PromptBundle {
    std::string query;
    std::vector<std::string> similar_questions;  // log entries, rerank order
    std::vector<std::string> web_titles;         // web entries, rerank order
    std::vector<std::string> entity_details;     // "name:description" lines
    std::string rendered;
};

std::string load_template(const std::filesystem::path& path);

// Substitutes the four placeholders with the query and the context grouped by
// source. Lists render one item per line; an empty list renders "(none)".
// Throws ValidationError when a placeholder is missing or duplicated.
PromptBundle assemble_prompt(std::string_view query,
                             const std::vector<RetrievalCandidate>& context,
                             const EntryStore& store, std::string_view template_text);

struct ModelOutput {
    std::string reasoning;
    std::string answer;
    bool format_ok = false;
};

// Matches "<think>" + reasoning + "</think>" + "\n\n" + answer, after
// trimming outer whitespace from the raw text. The separator is exactly one
// blank line and the answer must not start with whitespace. On mismatch the
// whole trimmed raw text becomes the answer with format_ok=false. Total —
// never throws.
ModelOutput parse_output(std::string_view raw);

}  // namespace qrag
