#include "qrag/promptgen.hpp"

#include <fstream>
#include <sstream>

#include "qrag/error.hpp"
#include "qrag/unicode.hpp"

namespace qrag {

namespace {

constexpr std::string_view kThinkOpen = "<think>";
constexpr std::string_view kThinkClose = "</think>";

std::string join_or_none(const std::vector<std::string>& items) {
    if (items.empty()) return std::string(kEmptySlotMarker);
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i > 0) out += '\n';
        out += items[i];
    }
    return out;
}

void substitute_once(std::string& text, std::string_view slot, const std::string& value) {
    std::size_t first = text.find(slot);
    if (first == std::string::npos) {
        throw ValidationError("prompt template: missing placeholder " + std::string(slot));
    }
    if (text.find(slot, first + slot.size()) != std::string::npos) {
        throw ValidationError("prompt template: duplicated placeholder " + std::string(slot));
    }
    text.replace(first, slot.size(), value);
}

}  // namespace

std::string load_template(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("prompt template: cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return std::move(buffer).str();
}

PromptBundle assemble_prompt(std::string_view query,
                             const std::vector<RetrievalCandidate>& context,
                             const EntryStore& store, std::string_view template_text) {
    PromptBundle bundle;
    bundle.query = std::string(query);
    for (const RetrievalCandidate& c : context) {
        auto ord = store.find(c.entry_id);
        if (!ord) throw ValidationError("assemble_prompt: candidate not in entry store: " + c.entry_id);
        const KnowledgeEntry& entry = store.entry(*ord);
        switch (entry.source) {
            case Source::log:
                bundle.similar_questions.push_back(entry.text);
                break;
            case Source::web:
                bundle.web_titles.push_back(entry.text);
                break;
            case Source::entity:
                bundle.entity_details.push_back(
                    entry.text + ":" + entry.description.value_or(""));
                break;
        }
    }

    bundle.rendered = std::string(template_text);
    substitute_once(bundle.rendered, kSlotSimilarQuestions,
                    join_or_none(bundle.similar_questions));
    substitute_once(bundle.rendered, kSlotWebTitles, join_or_none(bundle.web_titles));
    substitute_once(bundle.rendered, kSlotEntityDetails, join_or_none(bundle.entity_details));
    substitute_once(bundle.rendered, kSlotQuery, bundle.query);
    return bundle;
}

ModelOutput parse_output(std::string_view raw) {
    std::string_view text = trim_view(raw);
    ModelOutput out;
    out.answer = std::string(text);

    if (!text.starts_with(kThinkOpen)) return out;
    std::size_t close = text.find(kThinkClose, kThinkOpen.size());
    if (close == std::string_view::npos) return out;

    std::string_view rest = text.substr(close + kThinkClose.size());
    if (!rest.starts_with("\n\n")) return out;
    std::string_view answer = rest.substr(2);
    if (answer.empty()) return out;
    char first = answer.front();
    if (first == ' ' || first == '\t' || first == '\n' || first == '\r') return out;

    out.reasoning = std::string(text.substr(kThinkOpen.size(), close - kThinkOpen.size()));
    out.answer = std::string(trim_view(answer));
    out.format_ok = true;
    return out;
}

}  // namespace qrag
