#pragma once

#include <set>

#include "dopi/ids.hpp"

namespace dopi {

// Per-session ledger of what is known about the patient. Symptoms from the
// initial complaint are present but not asked.
struct SymptomRecorder {
    std::set<SymptomId> present;
    std::set<SymptomId> absent;
    std::set<SymptomId> asked;

    bool known(const SymptomId& s) const {
        return present.contains(s) || absent.contains(s) || asked.contains(s);
    }

    friend bool operator==(const SymptomRecorder&, const SymptomRecorder&) = default;
};

} // namespace dopi
