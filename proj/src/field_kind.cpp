#include "checkfield/field_kind.hpp"

#include "checkfield/errors.hpp"

namespace checkfield {

const std::array<FieldKind, 9>& all_field_kinds() {
    static const std::array<FieldKind, 9> kinds = {
        FieldKind::signature,    FieldKind::date,      FieldKind::courtesy_amount,
        FieldKind::legal_amount, FieldKind::payer_name, FieldKind::bank_name,
        FieldKind::memo,         FieldKind::micr,      FieldKind::payee_name,
    };
    return kinds;
}

const std::array<FieldKind, 8>& module2_field_kinds() {
    static const std::array<FieldKind, 8> kinds = {
        FieldKind::date,      FieldKind::courtesy_amount, FieldKind::legal_amount,
        FieldKind::payer_name, FieldKind::bank_name,      FieldKind::memo,
        FieldKind::micr,      FieldKind::payee_name,
    };
    return kinds;
}

std::string_view field_kind_name(FieldKind kind) {
    switch (kind) {
        case FieldKind::signature: return "signature";
        case FieldKind::date: return "date";
        case FieldKind::courtesy_amount: return "courtesy_amount";
        case FieldKind::legal_amount: return "legal_amount";
        case FieldKind::payer_name: return "payer_name";
        case FieldKind::bank_name: return "bank_name";
        case FieldKind::memo: return "memo";
        case FieldKind::micr: return "micr";
        case FieldKind::payee_name: return "payee_name";
    }
    throw ContractError("field_kind_name: invalid FieldKind value");
}

std::optional<FieldKind> parse_field_kind(std::string_view name) {
    for (FieldKind kind : all_field_kinds()) {
        if (field_kind_name(kind) == name) return kind;
    }
    return std::nullopt;
}

PromptGroup prompt_group_of(FieldKind kind) {
    switch (kind) {
        case FieldKind::signature:
            return PromptGroup::signature;
        case FieldKind::date:
        case FieldKind::courtesy_amount:
        case FieldKind::legal_amount:
        case FieldKind::micr:
        case FieldKind::memo:
            return PromptGroup::check_fields;
        case FieldKind::payer_name:
        case FieldKind::payee_name:
        case FieldKind::bank_name:
            return PromptGroup::texts;
    }
    throw ContractError("prompt_group_of: invalid FieldKind value");
}

std::string_view prompt_group_text(PromptGroup group) {
    switch (group) {
        case PromptGroup::signature: return "signature";
        case PromptGroup::check_fields: return "check fields";
        case PromptGroup::texts: return "texts";
    }
    throw ContractError("prompt_group_text: invalid PromptGroup value");
}

int module_of(FieldKind kind) {
    return kind == FieldKind::signature ? 1 : 2;
}

}  // namespace checkfield
