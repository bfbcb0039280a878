#pragma once

#include <string>

namespace chronoreg {

enum class Verdict { pass, warn, fail, skipped };

std::string to_string(Verdict v);  // "PASS", "WARN", "FAIL", "SKIPPED"
Verdict verdict_from_string(const std::string& s);

/// Worst of two verdicts, ordered FAIL > WARN > PASS > SKIPPED.
Verdict combine(Verdict a, Verdict b);

}  // namespace chronoreg
