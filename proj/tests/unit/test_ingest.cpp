#include <doctest.h>

#include <algorithm>
#include <fstream>

#include "blockscope/ast_json.hpp"
#include "blockscope/ingest.hpp"
#include "blockscope/metrics.hpp"
#include "blockscope/opcode_table.hpp"
#include "blockscope/zip.hpp"
#include "builders.hpp"
#include "fixtures.hpp"
#include "generators.hpp"

using namespace blockscope;
using namespace testsupport;

namespace {

Project strip_identity(Project p) {
  p.id = p.name = "";
  p.dialect = Dialect::Sb3;
  return p;
}

std::size_t script_total(const Project& p) {
  std::size_t n = 0;
  for (const Sprite* s : targets(p)) n += s->scripts.size();
  return n;
}

std::size_t orphan_total(const Project& p) {
  std::size_t n = 0;
  for (const Sprite* s : targets(p)) n += s->orphan_blocks.size();
  return n;
}

void write_bytes(const std::filesystem::path& p, std::string_view data) {
  std::ofstream out(p, std::ios::binary);
  out << data;
}

}  // namespace

TEST_SUITE("model") {
  TEST_CASE("pre-order traversal visits reporters before substacks") {
    Script s = script(flag(), {B("control_if").rep("CONDITION", B("sensing_mousedown")).sub({move(10)})});
    std::vector<std::string> seen;
    for_each_block(s, [&](const Block& b, const BlockSite&) { seen.push_back(b.opcode); });
    CHECK(seen == std::vector<std::string>{"event_whenflagclicked", "control_if", "sensing_mousedown",
                                           "motion_movesteps"});
    CHECK(count_blocks(s) == 4);
  }

  TEST_CASE("targets put the stage first") {
    Project p = project({sprite("A"), sprite("B")});
    auto t = targets(p);
    REQUIRE(t.size() == 3);
    CHECK(t[0]->is_stage);
    CHECK(t[2]->name == "B");
  }

  TEST_CASE("menu lookups") {
    Block b = receive("go");
    CHECK(menu_value(b, "BROADCAST_OPTION") == "go");
    CHECK_FALSE(menu_value(b, "OTHER").has_value());
    CHECK(first_menu_value(move(3)) == std::nullopt);
  }

  TEST_CASE("JSON form of the AST round-trips") {
    Rng rng(11);
    for (int i = 0; i < 50; ++i) {
      Project p = random_project(rng, "r" + std::to_string(i));
      CHECK(project_from_json(to_json(p)) == p);
    }
  }
}

TEST_SUITE("opcode_table") {
  TEST_CASE("both dialects map to the same canonical opcode") {
    const auto& t = OpcodeTable::builtin();
    CHECK(t.normalize(Dialect::Sb2, "forward:") == "motion_movesteps");
    CHECK(t.normalize(Dialect::Sb3, "motion_movesteps") == "motion_movesteps");
    CHECK(t.normalize(Dialect::Sb2, "broadcast:") == "event_broadcast");
    CHECK(t.category("motion_movesteps") == Category::Motion);
    CHECK(t.version() == "1");
  }

  TEST_CASE("unknown opcodes are kept with a prefix and the custom category") {
    CHECK(normalize_opcode(Dialect::Sb3, "weird_thing") == "unknown:weird_thing");
    CHECK(block_category("unknown:weird_thing") == Category::Custom);
  }

  TEST_CASE("malformed tables report the line") {
    const std::string bad = "dialect,raw,canonical,category,args\nsb2,forward:,motion_movesteps,nowhere,STEPS\n";
    try {
      OpcodeTable::from_csv(bad);
      FAIL("expected an error");
    } catch (const OpcodeTableError& e) {
      CHECK(e.line() == 2);
    }
  }
}

TEST_SUITE("zip") {
  TEST_CASE("stored and deflated entries round-trip") {
    zip::Writer w;
    const std::string text(5000, 'x');
    w.add("a.txt", text, false);
    w.add("b.txt", text + "tail", true);
    zip::Archive a(w.finish());
    REQUIRE(a.entries().size() == 2);
    CHECK(a.entries()[0].method == 0);
    CHECK(a.entries()[1].method == 8);
    CHECK(a.entries()[1].compressed_size < a.entries()[1].uncompressed_size);
    CHECK(a.read(*a.find("a.txt")) == text);
    CHECK(a.read(*a.find("b.txt")) == text + "tail");
    CHECK(a.find("missing") == nullptr);
  }

  TEST_CASE("archives written by another implementation are readable") {
    for (const char* name : {"p05_broadcast.sb3", "p10_pen.sb2"}) {
      zip::Archive a(zip::read_file((fixture_dir() / "archives" / name).string()));
      const auto* e = a.find("project.json");
      REQUIRE(e != nullptr);
      CHECK_FALSE(a.read(*e).empty());
    }
  }

  TEST_CASE("corruption is detected") {
    zip::Writer w;
    w.add("project.json", "{\"targets\": []}", false);
    auto bytes = w.finish();
    CHECK(zip::looks_like_zip(bytes));
    // Flip one payload byte: the CRC no longer matches.
    auto it = std::search(bytes.begin(), bytes.end(), std::begin("targets"), std::end("targets") - 1);
    REQUIRE(it != bytes.end());
    *it = 'T';
    zip::Archive a(bytes);
    CHECK_THROWS_AS(a.read(a.entries().front()), zip::ZipError);
    CHECK_THROWS_AS(zip::Archive(std::vector<std::uint8_t>{1, 2, 3}), zip::ZipError);
  }
}

TEST_SUITE("ingest") {
  TEST_CASE("fixture archives match hand counts in both dialects") {
    const auto dir = temp_dir("fixtures");
    const auto cases = format_cases();
    REQUIRE(cases.size() >= 10);
    for (const auto& c : cases) {
      CAPTURE(c.name);
      const Project sb2 = load_project(zip_fixture(dir, c.name, "sb2"));
      const Project sb3 = load_project(zip_fixture(dir, c.name, "sb3", false));
      CHECK(sb2.dialect == Dialect::Sb2);
      CHECK(sb3.dialect == Dialect::Sb3);
      for (const Project* p : {&sb2, &sb3}) {
        CHECK(p->sprites.size() == c.sprites);
        CHECK(script_total(*p) == c.scripts);
        CHECK(orphan_total(*p) == c.orphans);
        CHECK(count_blocks(*p) == c.blocks);
      }
      CHECK(strip_identity(sb2) == strip_identity(sb3));
    }
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("project ids come from the file stem") {
    const auto dir = temp_dir("stem");
    const Project p = load_project(zip_fixture(dir, "p01_hello", "sb3"));
    CHECK(p.id == "p01_hello");
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("error kinds") {
    const auto dir = temp_dir("errors");
    auto kind_of = [](const std::filesystem::path& p) {
      try {
        load_project(p);
      } catch (const IngestError& e) {
        return std::optional(e.kind());
      }
      return std::optional<IngestErrorKind>{};
    };
    write_bytes(dir / "text.sb3", "just some text");
    CHECK(kind_of(dir / "text.sb3") == IngestErrorKind::NotAZip);

    zip::Writer no_json;
    no_json.add("sprite.svg", "<svg/>");
    zip::write_file((dir / "nojson.sb3").string(), no_json.finish());
    CHECK(kind_of(dir / "nojson.sb3") == IngestErrorKind::MissingProjectJson);

    zip::Writer broken;
    broken.add("project.json", "{\"targets\": [");
    zip::write_file((dir / "broken.sb3").string(), broken.finish());
    CHECK(kind_of(dir / "broken.sb3") == IngestErrorKind::MalformedJson);

    zip::Writer neither;
    neither.add("project.json", "{\"hello\": 1}");
    zip::write_file((dir / "neither.sb3").string(), neither.finish());
    CHECK(kind_of(dir / "neither.sb3") == IngestErrorKind::AmbiguousDialect);
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("malformed JSON reports a byte offset") {
    try {
      parse_project_json("{\"targets\": [}", "x");
      FAIL("expected an error");
    } catch (const IngestError& e) {
      CHECK(e.kind() == IngestErrorKind::MalformedJson);
      REQUIRE(e.position().has_value());
      CHECK(*e.position() > 0);
    }
  }

  TEST_CASE("unknown raw opcodes survive as unknown blocks") {
    const std::string json = R"({"targets":[{"isStage":true,"name":"Stage","blocks":{
      "a":{"opcode":"event_whenflagclicked","next":"b","parent":null,"inputs":{},"fields":{},"topLevel":true},
      "b":{"opcode":"extension_mystery","next":null,"parent":"a","inputs":{},"fields":{},"topLevel":false}},
      "costumes":[],"sounds":[],"variables":{},"lists":{}}]})";
    std::vector<Diagnostic> diags;
    const Project p = parse_project_json(json, "u", &diags);
    REQUIRE(p.stage.scripts.size() == 1);
    REQUIRE(p.stage.scripts[0].body.size() == 1);
    CHECK(p.stage.scripts[0].body[0].opcode == "unknown:extension_mystery");
    CHECK(p.stage.scripts[0].body[0].category == Category::Custom);
  }

  TEST_CASE("random projects survive sb3 serialization") {
    Rng rng(2024);
    for (int i = 0; i < 200; ++i) {
      const Project p = random_project(rng, "rt" + std::to_string(i));
      const Project back = parse_project_json(to_sb3_json(p), p.id);
      CHECK(back == p);
    }
  }

  TEST_CASE("metadata parsing") {
    const auto meta = parse_metadata("project_id,group,age\np1,f,9\np2,m,\n");
    CHECK(meta.at("p1") == ProjectMeta{"f", 9});
    CHECK(meta.at("p2").group == "m");
    CHECK_FALSE(meta.at("p2").age.has_value());
    try {
      parse_metadata("project_id,group,age\np1,f,nine\n");
      FAIL("expected an error");
    } catch (const IngestError& e) {
      CHECK(e.kind() == IngestErrorKind::MetadataParseError);
      CHECK(e.position() == 2);
    }
    CHECK_THROWS_AS(parse_metadata("project_id,group,age\np1,f,9\np1,m,8\n"), IngestError);
  }

  TEST_CASE("the untouched default project is recognized") {
    Project p = project({sprite("Sprite1", {}, {"costume1", "costume2"})});
    p.sprites[0].sounds.push_back({"Meow"});
    CHECK(is_default_unmodified(p));
    p.stage.costumes.push_back({"my drawing"});
    CHECK_FALSE(is_default_unmodified(p));
  }

  TEST_CASE("corpus loading is robust, complete and order-independent") {
    const auto dir = temp_dir("corpus");
    Rng rng(5);
    for (int i = 0; i < 12; ++i) write_sb3(dir, random_project(rng, "c" + std::to_string(i)), i % 2 == 0);
    write_bytes(dir / "junk.sb3", "not a zip");
    Project untouched = project({sprite("Sprite1", {}, {"costume1"})}, {}, "default");
    write_sb3(dir, untouched);

    const Corpus a = load_corpus(dir, {}, {.strict = false, .jobs = 1});
    const Corpus b = load_corpus(dir, {}, {.strict = false, .jobs = 4});
    CHECK(a.projects == b.projects);
    CHECK(a.warnings.size() == b.warnings.size());
    CHECK(a.projects.size() == 12);
    CHECK(a.archives_seen == 14);
    CHECK(a.archives_seen == a.projects.size() + a.excluded_count());
    CHECK(std::is_sorted(a.projects.begin(), a.projects.end(),
                         [](const Project& x, const Project& y) { return x.id < y.id; }));
    auto has = [&](const std::string& code) {
      return std::any_of(a.warnings.begin(), a.warnings.end(), [&](const Diagnostic& d) { return d.code == code; });
    };
    CHECK(has("NotAZip"));
    CHECK(has("DefaultUnmodified"));
    CHECK(a.meta("c0").group == "unknown");

    CHECK_THROWS_AS(load_corpus(dir, {}, {.strict = true}), IngestError);
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("an empty directory is an empty corpus") {
    const auto dir = temp_dir("empty");
    try {
      load_corpus(dir, {});
      FAIL("expected an error");
    } catch (const IngestError& e) {
      CHECK(e.kind() == IngestErrorKind::EmptyCorpus);
    }
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("numbers print in shortest form") {
    CHECK(format_number(10.0) == "10");
    CHECK(format_number(-3.0) == "-3");
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(2.5) == "2.5");
  }
}
