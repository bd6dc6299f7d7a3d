#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace checkfield {

// The nine semantic regions of a bank check. `signature` is resolved by the
// label-overlay loop (module 1); the other eight go through the OCR/CER
// pipeline (module 2).
enum class FieldKind {
    signature,
    date,
    courtesy_amount,
    legal_amount,
    payer_name,
    bank_name,
    memo,
    micr,
    payee_name,
};

inline constexpr int kFieldKindCount = 9;

// The detector prompt each field's candidates come from.
enum class PromptGroup {
    signature,     // "signature"
    check_fields,  // "check fields"
    texts,         // "texts"
};

const std::array<FieldKind, 9>& all_field_kinds();
const std::array<FieldKind, 8>& module2_field_kinds();

std::string_view field_kind_name(FieldKind kind);
std::optional<FieldKind> parse_field_kind(std::string_view name);

PromptGroup prompt_group_of(FieldKind kind);
std::string_view prompt_group_text(PromptGroup group);

// 1 for signature, 2 for everything else.
int module_of(FieldKind kind);

}  // namespace checkfield
