#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace websynth::prompts {

// Template text by resource name, e.g. "proposer_system".
std::string_view get(std::string_view name);
std::vector<std::string_view> names();

// Digest over every template; transcripts record it so a template edit makes
// stale replay fixtures fail loudly instead of silently mismatching.
const std::string& version();

// Substitutes {NAME} placeholders listed in `vars`; other braces are kept.
std::string fill(std::string_view tmpl, const std::map<std::string, std::string>& vars);

}  // namespace websynth::prompts
