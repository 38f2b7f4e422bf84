#pragma once

#include <string_view>

// Bundled copies of the files under data/, compiled into the library.
namespace tmine::resources {

std::string_view templates_json();
std::string_view lexicon_tsv();
std::string_view gerund_exceptions_tsv();
std::string_view plural_exceptions_tsv();

}  // namespace tmine::resources
