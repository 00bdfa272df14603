#include "engram/citation.hpp"

#include <unordered_set>

namespace engram {

std::vector<std::string> parse_citations(const std::string& answer) {
    std::vector<std::string> cited;
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i + 3 <= answer.size(); ++i) {
        if (answer[i] != '[' || answer[i + 1] != 'E') continue;
        std::size_t j = i + 2;
        while (j < answer.size() && answer[j] >= '0' && answer[j] <= '9') ++j;
        if (j == i + 2 || j >= answer.size() || answer[j] != ']') continue;
        std::string label = answer.substr(i + 1, j - i - 1);
        if (seen.insert(label).second) cited.push_back(std::move(label));
        i = j;  // resume after the closing bracket
    }
    return cited;
}

CitationReport validate(const std::vector<std::string>& cited, const FactCardSet& cards) {
    CitationReport report;
    report.cited = cited;
    for (const auto& label : cited)
        if (!cards.has(label)) report.invalid.push_back(label);
    report.uncited_answer = cited.empty();
    report.valid = report.invalid.empty();
    return report;
}

CitationReport check_answer(const std::string& answer, const FactCardSet& cards) {
    return validate(parse_citations(answer), cards);
}

}  // namespace engram
