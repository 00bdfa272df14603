#pragma once

#include <string>
#include <vector>

#include "engram/factcards.hpp"

namespace engram {

struct CitationReport {
    std::vector<std::string> cited;    // first-occurrence order, de-duplicated
    std::vector<std::string> invalid;  // cited ids absent from the card set
    bool uncited_answer = false;
    bool valid = false;  // invalid.empty()
};

// Every "[E<digits>]" label in the answer, first-occurrence order, duplicates
// removed. Labels are kept verbatim ("E007" stays distinct from "E7").
std::vector<std::string> parse_citations(const std::string& answer);

CitationReport validate(const std::vector<std::string>& cited, const FactCardSet& cards);

CitationReport check_answer(const std::string& answer, const FactCardSet& cards);

}  // namespace engram
