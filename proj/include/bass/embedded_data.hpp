#pragma once

#include <string_view>

// Data files under data/ compiled into the library.
namespace bass::embedded {

extern const std::string_view stopwords_en_v1;
extern const std::string_view bass_suggest_v1;
extern const std::string_view scifi_system_v1;
extern const std::string_view scifi_user_v1;

}  // namespace bass::embedded
