#include "test_helpers.hpp"

#include <doctest.h>

#include <random>

using namespace ziggurat;

TEST_CASE("put then get round-trips payloads") {
    zt::TempDir dir;
    Workspace ws(dir.path());
    const Message msg = ws.put(Address("results/a.txt"), "0123456789", {"ten bytes"});
    CHECK(msg.desc.size_bytes == 10);
    CHECK(msg.addr.value == "results/a.txt");
    CHECK(ws.get(Address("results/a.txt")) == "0123456789");

    SUBCASE("unknown address raises NotFound") {
        try {
            ws.get(Address("results/missing.txt"));
            FAIL("expected NotFound");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::not_found);
        }
    }

    SUBCASE("1 MiB random payload round-trips hash-equal") {
        std::mt19937_64 rng(1);
        std::string payload(1 << 20, '\0');
        for (auto& c : payload) c = static_cast<char>(rng() & 0xff);
        ws.put(Address("blob.bin"), payload, {"binary blob", "bin"});
        CHECK(detail::fnv1a(ws.get(Address("blob.bin"))) == detail::fnv1a(payload));
    }
}

TEST_CASE("address traversal guards") {
    zt::TempDir dir;
    Workspace ws(dir.path());
    for (const char* bad : {"../x", "a/../b", "/abs/path", "a\\b", "", "a//b", "./x"}) {
        try {
            ws.put(Address(bad), "x", {"d"});
            FAIL_CHECK("expected AddressEscape for: " << bad);
        } catch (const Error& e) {
            CHECK(e.code() == Errc::address_escape);
        }
    }
}

TEST_CASE("descriptor length boundary at the limit") {
    zt::TempDir dir;
    Workspace ws(dir.path());
    const std::string at_limit(512, 'd');
    CHECK_NOTHROW(ws.put(Address("ok.txt"), "x", {at_limit}));
    const std::string over(513, 'd');
    try {
        ws.put(Address("no.txt"), "x", {over});
        FAIL("expected DescriptorTooLong");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::descriptor_too_long);
    }

    SUBCASE("600 chars against the 512 limit") {
        try {
            ws.put(Address("no2.txt"), "x", {std::string(600, 'e')});
            FAIL("expected DescriptorTooLong");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::descriptor_too_long);
        }
    }

    SUBCASE("the limit applies to the escaped form") {
        // 300 quotes escape to 600 chars
        try {
            ws.put(Address("no3.txt"), "x", {std::string(300, '"')});
            FAIL("expected DescriptorTooLong");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::descriptor_too_long);
        }
    }
}

TEST_CASE("send appends to the recipient inbox") {
    zt::TempDir dir;
    Workspace ws(dir.path());
    ws.register_agent("alice");
    ws.register_agent("bob");
    Message msg = ws.put(Address("r/x.txt"), "payload", {"desc"});
    msg.from = "alice";
    msg.to = "bob";
    const DeliveryReceipt receipt = ws.send(msg);
    CHECK(receipt.inbox_size == 1);
    CHECK(ws.inbox("bob").size() == 1);
    CHECK(ws.inbox("bob").front() == msg);

    SUBCASE("dangling address is rejected") {
        Message bad = msg;
        bad.addr = Address("never/stored.txt");
        try {
            ws.send(bad);
            FAIL("expected DanglingAddress");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::dangling_address);
        }
    }

    SUBCASE("unknown recipient is rejected") {
        Message bad = msg;
        bad.to = "nobody";
        try {
            ws.send(bad);
            FAIL("expected UnknownRecipient");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::unknown_recipient);
        }
    }
}

TEST_CASE("property: inbox preserves per-sender send order") {
    zt::TempDir dir;
    Workspace ws(dir.path());
    ws.register_agent("sink");
    for (int i = 0; i < 100; ++i) {
        Message msg =
            ws.put(Address("m/" + std::to_string(i) + ".txt"), "p" + std::to_string(i), {"d"});
        msg.from = "sender";
        msg.to = "sink";
        ws.send(msg);
    }
    const auto box = ws.inbox("sink");
    REQUIRE(box.size() == 100);
    for (int i = 0; i < 100; ++i) {
        CHECK(box[static_cast<std::size_t>(i)].addr.value == "m/" + std::to_string(i) + ".txt");
    }
}

TEST_CASE("serialized messages are bounded independent of payload size") {
    zt::TempDir dir;
    Workspace ws(dir.path());
    ws.register_agent("to");
    const std::size_t bound = max_message_wire_size(ws.config());
    std::string small_wire;
    for (const std::size_t payload_size : {std::size_t{1}, std::size_t{4096}, std::size_t{1u << 20}}) {
        Message msg = ws.put(Address("payload.bin"), std::string(payload_size, 'z'),
                             {"a fixed descriptor", "bin"});
        msg.from = "from";
        msg.to = "to";
        const std::string wire = serialize_message(msg);
        CHECK(wire.size() <= bound);
        Message normalized = msg;
        normalized.desc.size_bytes = 0;
        if (small_wire.empty()) {
            small_wire = serialize_message(normalized);
        } else {
            CHECK(serialize_message(normalized) == small_wire);  // payload size is invisible
        }
    }
}

TEST_CASE("messages structurally carry no payload") {
    // The wire form has exactly addr, desc{kind,size_bytes,text}, from, to.
    Message msg{"a", "b", Address("x.txt"), {"text", "kind", 123}};
    const nlohmann::json j = message_to_json(msg);
    CHECK(j.size() == 4);
    CHECK(j.contains("addr"));
    CHECK(j.contains("desc"));
    CHECK(j.contains("from"));
    CHECK(j.contains("to"));
    CHECK(message_from_json(j) == msg);
}

TEST_CASE("last writer wins with both versions in the audit trail") {
    zt::TempDir dir;
    Workspace ws(dir.path());
    ws.put(Address("v.txt"), "one", {"first version"});
    ws.put(Address("v.txt"), "two", {"second version"});
    CHECK(ws.get(Address("v.txt")) == "two");
    CHECK(ws.descriptors().size() == 1);
    CHECK(ws.index_entries().size() == 2);
    CHECK(ws.mutation_count() == 2);
}

TEST_CASE("workspace reopens from disk") {
    zt::TempDir dir;
    {
        Workspace ws(dir.path());
        ws.register_agent("r");
        Message msg = ws.put(Address("keep/data.txt"), "persisted", {"kept artifact"});
        msg.from = "s";
        msg.to = "r";
        ws.send(msg);
    }
    Workspace reopened = Workspace::open(dir.path());
    CHECK(reopened.get(Address("keep/data.txt")) == "persisted");
    CHECK(reopened.inbox("r").size() == 1);
    CHECK(reopened.descriptors().size() == 1);
}
