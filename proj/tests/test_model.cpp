#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <functional>
#include <random>

#include "cloudshift/errors.hpp"
#include "cloudshift/model.hpp"

using namespace cloudshift;
using namespace cloudshift::model;

namespace {

std::string minimal_doc() {
    return R"({
      "entities": [
        {"name": "Thing",
         "properties": [
           {"name": "Id", "kind": "text", "max_length": 32, "required": true, "is_key": true}
         ]}
      ]
    })";
}

ErrorKind kind_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an Error to be thrown");
    return ErrorKind::io;
}

}  // namespace

TEST_CASE("personnel preset matches the canonical seven-property entity") {
    ModelBundle bundle = personnel_preset();
    REQUIRE(bundle.conceptual.entities.size() == 1);
    const EntityDef& e = bundle.conceptual.entities.front();
    CHECK(e.name == "Personnel");
    CHECK(e.properties.size() == 7);

    const PropertyDef& key = e.key_property();
    CHECK(key.name == "PersonalID");
    CHECK(key.required);
    CHECK(key.generated);

    int required = 0;
    for (const auto& p : e.properties) {
        if (p.required) ++required;
    }
    CHECK(required == 1);  // only the key is required

    CHECK(e.blob_properties() == std::vector<std::string>{"TextFile", "Picture"});
    CHECK(e.scalar_properties() ==
          std::vector<std::string>{"PersonalID", "LastName", "FirstName", "Address", "City"});

    // Derived storage uses the dbo namespace and one identically named table.
    CHECK(bundle.storage.schema_namespace == "dbo");
    REQUIRE(bundle.storage.find_table("Personnel") != nullptr);
    CHECK(*bundle.mapping.table_for("Personnel") == "Personnel");
    CHECK(validate_mapping(bundle.mapping, bundle.conceptual, bundle.storage).empty());
}

TEST_CASE("build_model accepts the smallest legal model") {
    ConceptualModel m = build_model(minimal_doc());
    REQUIRE(m.entities.size() == 1);
    CHECK(m.entities[0].key_property().name == "Id");
}

TEST_CASE("build_model rejects malformed input") {
    SUBCASE("parse failure") {
        CHECK(kind_of([] { build_model("{nope"); }) == ErrorKind::parse);
    }
    SUBCASE("duplicate property name") {
        const std::string doc = R"({"entities":[{"name":"E","properties":[
          {"name":"Id","kind":"text","required":true,"is_key":true},
          {"name":"City","kind":"text"},
          {"name":"City","kind":"text"}]}]})";
        CHECK(kind_of([&] { build_model(doc); }) == ErrorKind::invalid_model);
    }
    SUBCASE("entity without a key") {
        const std::string doc =
            R"({"entities":[{"name":"E","properties":[{"name":"A","kind":"text"}]}]})";
        CHECK(kind_of([&] { build_model(doc); }) == ErrorKind::invalid_model);
    }
    SUBCASE("composite keys are rejected") {
        const std::string doc = R"({"entities":[{"name":"E","properties":[
          {"name":"A","kind":"text","required":true,"is_key":true},
          {"name":"B","kind":"text","required":true,"is_key":true}]}]})";
        CHECK(kind_of([&] { build_model(doc); }) == ErrorKind::invalid_model);
    }
    SUBCASE("key must be required") {
        const std::string doc = R"({"entities":[{"name":"E","properties":[
          {"name":"A","kind":"text","is_key":true}]}]})";
        CHECK(kind_of([&] { build_model(doc); }) == ErrorKind::invalid_model);
    }
    SUBCASE("dangling association") {
        const std::string doc = R"({"entities":[{"name":"E","properties":[
          {"name":"Id","kind":"text","required":true,"is_key":true}],
          "associations":[{"name":"r","from_entity":"E","to_entity":"Nope",
                           "from_property":"Id","to_property":"Id"}]}]})";
        CHECK(kind_of([&] { build_model(doc); }) == ErrorKind::invalid_model);
    }
    SUBCASE("unknown kind") {
        const std::string doc = R"({"entities":[{"name":"E","properties":[
          {"name":"Id","kind":"float","required":true,"is_key":true}]}]})";
        CHECK(kind_of([&] { build_model(doc); }) == ErrorKind::invalid_model);
    }
    SUBCASE("zero max_length") {
        const std::string doc = R"({"entities":[{"name":"E","properties":[
          {"name":"Id","kind":"text","max_length":0,"required":true,"is_key":true}]}]})";
        CHECK(kind_of([&] { build_model(doc); }) == ErrorKind::invalid_model);
    }
    SUBCASE("invalid identifier") {
        const std::string doc = R"({"entities":[{"name":"9E","properties":[
          {"name":"Id","kind":"text","required":true,"is_key":true}]}]})";
        CHECK(kind_of([&] { build_model(doc); }) == ErrorKind::invalid_model);
    }
}

TEST_CASE("identifier rules") {
    CHECK(is_identifier("Personnel"));
    CHECK(is_identifier("_a1"));
    CHECK(is_identifier("A_B_9"));
    CHECK_FALSE(is_identifier(""));
    CHECK_FALSE(is_identifier("9abc"));
    CHECK_FALSE(is_identifier("has-dash"));
    CHECK_FALSE(is_identifier("has space"));
    CHECK_FALSE(is_identifier("dotted.name"));
}

TEST_CASE("derive_default_mapping uses identical names") {
    ModelBundle bundle = personnel_preset();
    MappingSpec derived = derive_default_mapping(bundle.conceptual, bundle.storage);
    CHECK(*derived.table_for("Personnel") == "Personnel");
    CHECK(*derived.column_for("Personnel", "LastName") == "LastName");

    SUBCASE("idempotent: deriving twice yields an identical spec") {
        MappingSpec again = derive_default_mapping(bundle.conceptual, bundle.storage);
        CHECK(derived == again);
        MappingSpec third = derive_default_mapping(bundle.conceptual, bundle.storage, &derived);
        CHECK(derived == third);
    }

    SUBCASE("missing identically named table is an error") {
        StorageModel storage = bundle.storage;
        storage.tables[0].name = "Staff";
        CHECK(kind_of([&] { derive_default_mapping(bundle.conceptual, storage); }) ==
              ErrorKind::invalid_model);
    }

    SUBCASE("an explicit override bridges differently named tables") {
        StorageModel storage = bundle.storage;
        storage.tables[0].name = "Staff";
        MappingSpec overrides;
        overrides.entity_to_table["Personnel"] = "Staff";
        MappingSpec mapped = derive_default_mapping(bundle.conceptual, storage, &overrides);
        CHECK(*mapped.table_for("Personnel") == "Staff");
        CHECK(*mapped.column_for("Personnel", "City") == "City");
        CHECK(validate_mapping(mapped, bundle.conceptual, storage).empty());
    }
}

TEST_CASE("validate_mapping finds length overflows and dangling references") {
    ModelBundle bundle = personnel_preset();

    SUBCASE("fully mapped model with equal lengths is clean") {
        CHECK(validate_mapping(bundle.mapping, bundle.conceptual, bundle.storage).empty());
    }

    SUBCASE("property max_length above the column's is one violation") {
        ModelBundle b = bundle;
        // LastName property says 100 bytes, column stays at 50.
        for (auto& p : b.conceptual.entities[0].properties) {
            if (p.name == "LastName") p.max_length = 100;
        }
        auto violations = validate_mapping(b.mapping, b.conceptual, b.storage);
        REQUIRE(violations.size() == 1);
        CHECK(violations[0].code == MappingViolation::Code::length_overflow);
        CHECK(violations[0].property == "LastName");
    }

    SUBCASE("mapping to a nonexistent column is one violation") {
        ModelBundle b = bundle;
        b.mapping.property_to_column[{"Personnel", "City"}] = "Zip";
        auto violations = validate_mapping(b.mapping, b.conceptual, b.storage);
        REQUIRE(violations.size() == 1);
        CHECK(violations[0].code == MappingViolation::Code::missing_column);
        CHECK(violations[0].detail.find("Zip") != std::string::npos);
    }

    SUBCASE("kind mismatches are flagged") {
        ModelBundle b = bundle;
        // Point the Picture blob at a varchar column.
        b.mapping.property_to_column[{"Personnel", "Picture"}] = "City";
        auto violations = validate_mapping(b.mapping, b.conceptual, b.storage);
        REQUIRE(violations.size() == 1);
        CHECK(violations[0].code == MappingViolation::Code::kind_mismatch);
    }

    SUBCASE("incomplete type_map is flagged") {
        ModelBundle b = bundle;
        b.mapping.type_map.erase(PropertyKind::integer);
        auto violations = validate_mapping(b.mapping, b.conceptual, b.storage);
        REQUIRE(violations.size() == 1);
        CHECK(violations[0].code == MappingViolation::Code::incomplete_type_map);
    }
}

TEST_CASE("model documents round-trip through serialize/load") {
    ModelBundle bundle = personnel_preset();
    ModelBundle reloaded = load_model_document(serialize(bundle));
    CHECK(bundle.conceptual == reloaded.conceptual);
    CHECK(bundle.storage == reloaded.storage);
    CHECK(bundle.mapping == reloaded.mapping);
}

TEST_CASE("storage generated from a conceptual model validates cleanly") {
    // Generation-then-validation closure over randomized models.
    std::mt19937_64 rng(20260810);
    const PropertyKind kinds[] = {PropertyKind::text, PropertyKind::integer,
                                  PropertyKind::binary_blob, PropertyKind::text_blob};

    for (int iteration = 0; iteration < 25; ++iteration) {
        ConceptualModel conceptual;
        const int entity_count = 1 + static_cast<int>(rng() % 3);
        for (int e = 0; e < entity_count; ++e) {
            EntityDef entity;
            entity.name = "Entity" + std::to_string(e);
            PropertyDef key;
            key.name = "Key" + std::to_string(e);
            key.kind = PropertyKind::text;
            key.max_length = 16 + rng() % 64;
            key.required = true;
            key.is_key = true;
            entity.properties.push_back(key);
            const int prop_count = static_cast<int>(rng() % 5);
            for (int p = 0; p < prop_count; ++p) {
                PropertyDef prop;
                prop.name = "Prop" + std::to_string(p);
                prop.kind = kinds[rng() % 4];
                if (prop.kind == PropertyKind::text && (rng() & 1)) {
                    prop.max_length = 1 + rng() % 200;
                }
                prop.required = (rng() % 4) == 0;
                entity.properties.push_back(prop);
            }
            conceptual.entities.push_back(std::move(entity));
        }

        StorageModel storage = derive_storage(conceptual, default_type_map());
        MappingSpec mapping = derive_default_mapping(conceptual, storage);
        CHECK(validate_mapping(mapping, conceptual, storage).empty());

        // And the full document round-trips.
        ModelBundle bundle{conceptual, storage, mapping};
        ModelBundle reloaded = load_model_document(serialize(bundle));
        CHECK(bundle.conceptual == reloaded.conceptual);
        CHECK(bundle.storage == reloaded.storage);
        CHECK(bundle.mapping == reloaded.mapping);
    }
}

TEST_CASE("integer kind ladders") {
    CHECK(smallest_integer_kind(0, 200) == StorageKind::uint8);
    CHECK(smallest_integer_kind(-5, 100) == StorageKind::int8);
    CHECK(smallest_integer_kind(0, 300) == StorageKind::uint16);
    CHECK(smallest_integer_kind(-40000, 40000) == StorageKind::int32);
    CHECK(smallest_integer_kind(0, 5000000000ll) == StorageKind::uint64);
    CHECK(smallest_integer_kind(-5000000000ll, 0) == StorageKind::int64);

    CHECK(fits_integer_kind(StorageKind::uint8, 255));
    CHECK_FALSE(fits_integer_kind(StorageKind::uint8, 256));
    CHECK_FALSE(fits_integer_kind(StorageKind::uint8, -1));
    CHECK(fits_integer_kind(StorageKind::int64, INT64_MIN));
}

TEST_CASE("load_model_reference resolves presets and rejects unknown paths") {
    ModelBundle preset = load_model_reference("personnel");
    CHECK(preset.conceptual.entities.front().name == "Personnel");
    CHECK(kind_of([] { load_model_reference("/nonexistent/model.json"); }) == ErrorKind::io);
}

TEST_CASE("table schema JSON round-trips") {
    ModelBundle bundle = personnel_preset();
    const TableDef& table = bundle.storage.tables.front();
    TableDef reparsed = parse_table(serialize(table));
    CHECK(table == reparsed);
}
