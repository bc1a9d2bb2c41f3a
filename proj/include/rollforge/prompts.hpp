#pragma once

#include <string>
#include <vector>

namespace rollforge::text {

// Fixed instruction text around the spliced state/action/goal slots.
inline constexpr const char* kDynamicsPrefix =
    "You are an expert in identifying dynamics change in the environment. Current state is";
inline constexpr const char* kDynamicsMid = ", after executing action";
inline constexpr const char* kDynamicsSuffix = ", we get next state:";

inline constexpr const char* kExplainPrefix = "Explain the following rollout for me. Rollout:";
inline constexpr const char* kExplainSuffix = ". Explanation:";

inline constexpr const char* kGeneratePrefix =
    "Please output the RL rollout corresponding to the following goal. Goal:";
inline constexpr const char* kGenerateSuffix = ". Rollout:";

inline constexpr const char* kConsequencePrefix = "Initial state is";
inline constexpr const char* kConsequenceMid = ", after completing the goal";
inline constexpr const char* kConsequenceSuffix = ", we get terminal state";

inline std::vector<std::string> prompt_fragments() {
  return {kDynamicsPrefix, kDynamicsMid,        kDynamicsSuffix,  kExplainPrefix,
          kExplainSuffix,  kGeneratePrefix,     kGenerateSuffix,  kConsequencePrefix,
          kConsequenceMid, kConsequenceSuffix};
}

}  // namespace rollforge::text
