#pragma once

// Generates families of small annotated contracts with distinct vocabularies.

#include <array>
#include <string>
#include <vector>

namespace synthetic {

inline constexpr std::array<const char*, 10> kNouns{"ledger", "vault", "market", "bridge", "escrow",
                                                    "auction", "oracle", "stake", "pool", "grant"};
inline constexpr std::array<const char*, 10> kVerbs{"settle", "claim", "route", "lock", "mint",
                                                    "burn", "audit", "bid", "sweep", "vest"};
inline constexpr std::array<const char*, 5> kSwc{"SWC-101", "SWC-104", "SWC-107", "SWC-115", "SWC-116"};

struct Contract {
    std::string file_name;
    std::string source;
};

// Contract i has one annotated entry function calling one helper, so every
// contract contributes exactly one slice to an annotated corpus.
inline Contract make_contract(std::size_t i) {
    const std::string noun = kNouns[i % kNouns.size()];
    const std::string verb = kVerbs[(i / kNouns.size()) % kVerbs.size()];
    const std::string tag = std::to_string(i);
    const std::string name = "Gen" + tag;
    const std::string store = noun + "Balance" + tag;
    const std::string limit = verb + "Limit" + tag;
    const std::string entry = verb + "_" + noun + "_" + tag;
    const std::string helper = "_" + noun + "Hook" + tag;
    const std::string event = "On" + noun + tag;

    std::string s;
    s += "pragma solidity ^0.8.0;\n";                                           // 1
    s += "\n";                                                                  // 2
    s += "contract " + name + " {\n";                                           // 3
    s += "    mapping(address => uint256) " + store + ";\n";                    // 4
    s += "    uint256 " + limit + " = " + std::to_string(100 + i * 7) + ";\n";  // 5
    s += "    event " + event + "(address who, uint256 amount);\n";             // 6
    s += "\n";                                                                  // 7
    s += "    // " + verb + " entry point for the " + noun + "\n";              // 8
    s += "    function " + entry + "(uint256 amount) public {\n";               // 9
    s += "        // guard against oversized requests\n";                       // 10
    s += "        require(amount <= " + limit + ");\n";                         // 11
    s += "        " + store + "[msg.sender] += amount * " + std::to_string(i + 2) + ";\n";  // 12
    s += "        " + helper + "(amount);\n";                                   // 13
    s += "    }\n";                                                             // 14
    s += "\n";                                                                  // 15
    s += "    function " + helper + "(uint256 amount) internal {\n";            // 16
    s += "        emit " + event + "(msg.sender, amount + " + std::to_string(i) + ");\n";  // 17
    s += "    }\n";                                                             // 18
    s += "}\n";                                                                 // 19
    s += "// " + std::string(kSwc[i % kSwc.size()]) + ": L11-L13\n";
    return {"gen_" + tag + ".sol", s};
}

inline std::vector<Contract> make_contracts(std::size_t n) {
    std::vector<Contract> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(make_contract(i));
    return out;
}

}  // namespace synthetic
