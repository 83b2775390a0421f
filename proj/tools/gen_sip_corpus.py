#!/usr/bin/env python3
"""Writes the SIP conformance corpus: NN_name.sip (raw bytes) plus
NN_name.expected.json (the fields a correct parser must recover).

Messages are rendered here from field specs with deliberately varied
spelling (compact names, odd case, folding, bare LF, scattered order), so
the expectations do not depend on the C++ serializer.

usage: gen_sip_corpus.py <out-dir>
"""

import json
import os
import sys

COMPACT = {"Via": "v", "From": "f", "To": "t", "Call-ID": "i", "Contact": "m",
           "Content-Type": "c", "Content-Length": "l"}


def name_addr(uri, tag=None, display="", params=""):
    return {"display": display, "uri": uri, "tag": tag, "params": params}


def render_name_addr(na, angle=True, quote=True, tag_first=False):
    s = ""
    if na["display"]:
        s += ('"%s" ' % na["display"]) if quote else (na["display"] + " ")
    s += ("<%s>" % na["uri"]) if angle or na["display"] else na["uri"]
    tag = (";tag=%s" % na["tag"]) if na["tag"] is not None else ""
    s += (tag + na["params"]) if tag_first else (na["params"] + tag)
    return s


def sdp(session, addr, port, payloads):
    names = {0: "PCMU/8000", 8: "PCMA/8000", 18: "G729/8000", 101: "telephone-event/8000"}
    lines = ["v=0", "o=- %s 0 IN IP4 %s" % (session, addr), "s=-", "c=IN IP4 %s" % addr, "t=0 0",
             "m=audio %d RTP/AVP %s" % (port, " ".join(str(p) for p in payloads))]
    lines += ["a=rtpmap:%d %s" % (p, names[p]) for p in payloads]
    return "\r\n".join(lines) + "\r\n"


class Case:
    def __init__(self, name, start, headers, body="", eol="\r\n", expect=None):
        self.name = name
        self.start = start
        self.headers = headers  # list of (name-as-written, value-as-written)
        self.body = body
        self.eol = eol
        self.expect = expect

    def raw(self):
        out = self.start + self.eol
        for n, v in self.headers:
            out += "%s: %s%s" % (n, v, self.eol) if n is not None else v + self.eol
        return out + self.eol + self.body


def request(method, uri, call_id, cseq, frm, to, via, contact=None, ctype=None, others=(), body=""):
    return {"kind": "request", "method": method, "request_uri": uri, "via": via, "from": frm, "to": to,
            "call_id": call_id, "cseq": {"number": cseq, "method": method}, "contact": contact,
            "content_type": ctype, "content_length": len(body.encode()), "other_headers": [list(h) for h in others],
            "body": body}


def response(status, reason, call_id, cseq, method, frm, to, via, contact=None, ctype=None, others=(), body=""):
    return {"kind": "response", "status": status, "reason": reason, "via": via, "from": frm, "to": to,
            "call_id": call_id, "cseq": {"number": cseq, "method": method}, "contact": contact,
            "content_type": ctype, "content_length": len(body.encode()), "other_headers": [list(h) for h in others],
            "body": body}


def standard_headers(e, compact=False, lower=False, order=None, with_length=True, via_style="separate",
                     angle=True, quote=True, tag_first=False):
    def hn(n):
        if compact and n in COMPACT:
            return COMPACT[n]
        return n.lower() if lower else n

    hs = {}
    if e["via"]:
        if via_style == "separate":
            hs["Via"] = [(hn("Via"), v) for v in e["via"]]
        else:
            hs["Via"] = [(hn("Via"), ", ".join(e["via"]))]
    else:
        hs["Via"] = []
    hs["From"] = [(hn("From"), render_name_addr(e["from"], angle, quote, tag_first))]
    hs["To"] = [(hn("To"), render_name_addr(e["to"], angle, quote, tag_first))]
    hs["Call-ID"] = [(hn("Call-ID"), e["call_id"])]
    hs["CSeq"] = [(hn("CSeq"), "%d %s" % (e["cseq"]["number"], e["cseq"]["method"]))]
    hs["Contact"] = [(hn("Contact"), e["contact"])] if e["contact"] is not None else []
    hs["Content-Type"] = [(hn("Content-Type"), e["content_type"])] if e["content_type"] is not None else []
    hs["Content-Length"] = [(hn("Content-Length"), str(e["content_length"]))] if with_length else []
    others = [(n, v) for n, v in e["other_headers"]]
    keys = order or ["Via", "From", "To", "Call-ID", "CSeq", "Contact", "Content-Type", "Content-Length"]
    out = []
    for k in keys:
        out += hs[k]
    return out + others


def cases():
    alice = lambda tag="a1", **kw: name_addr("sip:alice@unity", tag, **kw)
    bob = lambda tag=None, **kw: name_addr("sip:bob@unity", tag, **kw)
    v1 = "SIP/2.0/UDP 10.0.0.1:5060;branch=z9hG4bK776asdhds"
    v2 = "SIP/2.0/UDP edge.unity;branch=z9hG4bK0000000000000001"
    offer = sdp("1001", "10.0.0.1", 40000, [0, 8, 101])
    answer = sdp("2002", "m7.p3.unity", 20014, [0, 101])
    out = []

    def add(name, e, **kw):
        body = e["body"]
        eol = kw.pop("eol", "\r\n")
        extra_lines = kw.pop("extra", None)
        hdrs = standard_headers(e, **kw)
        if extra_lines:
            hdrs = extra_lines(hdrs)
        if e["kind"] == "request":
            start = "%s %s SIP/2.0" % (e["method"], e["request_uri"])
        else:
            start = "SIP/2.0 %d %s" % (e["status"], e["reason"]) if e["reason"] else "SIP/2.0 %d" % e["status"]
        if eol == "\n":
            body = body.replace("\r\n", "\n")
            e = dict(e, body=body, content_length=len(body.encode()))
            hdrs = [(n, str(len(body.encode()))) if n in ("Content-Length", "l", "content-length") else (n, v)
                    for n, v in hdrs]
        out.append((name, Case(name, start, hdrs, body, eol, e)))

    # minimal requests
    add("minimal_invite", request("INVITE", "sip:bob@unity", "c1", 1, alice(), bob(), []))
    add("minimal_register", request("REGISTER", "sip:unity", "reg-1", 1, alice(), alice(None), [v1],
                                    contact="<sip:alice@10.0.0.1:5060>"))
    add("invite_with_sdp", request("INVITE", "sip:bob@unity", "call-000001", 1, alice(), bob(), [v1],
                                   contact="<sip:alice@10.0.0.1>", ctype="application/sdp", body=offer))
    add("ack", request("ACK", "sip:bob@unity", "call-000001", 1, alice(), bob("b9"), [v1]))
    add("bye", request("BYE", "sip:bob@unity", "call-000001", 2, alice(), bob("b9"), [v1]))
    add("bye_from_callee", request("BYE", "sip:alice@unity", "call-000002", 101, bob("b9"), alice(), [v2]))
    # responses
    add("trying", response(100, "Trying", "call-000001", 1, "INVITE", alice(), bob(), [v2, v1]))
    add("ringing", response(180, "Ringing", "call-000001", 1, "INVITE", alice(), bob("b9"), [v2, v1]))
    add("ok_with_sdp", response(200, "OK", "call-000001", 1, "INVITE", alice(), bob("b9"), [v2, v1],
                                contact="<sip:bob@10.0.0.2>", ctype="application/sdp", body=answer))
    add("ok_register", response(200, "OK", "reg-1", 1, "REGISTER", alice(), alice("r1"), [v1],
                                contact="<sip:alice@10.0.0.1:5060>", others=[("Expires", "600")]))
    add("ok_bye", response(200, "OK", "call-000001", 2, "BYE", alice(), bob("b9"), [v1]))
    add("forbidden", response(403, "Forbidden", "call-000003", 1, "INVITE", alice(), bob("x1"), [v1]))
    add("not_found", response(404, "Not Found", "call-000004", 1, "INVITE", alice(), bob("x2"), [v1]))
    add("request_timeout", response(408, "Request Timeout", "call-000005", 1, "INVITE", alice(), bob("x3"), [v1]))
    add("unavailable", response(480, "Temporarily Unavailable", "call-000006", 1, "INVITE", alice(), bob("x4"), [v1]))
    add("no_dialog", response(481, "Call/Transaction Does Not Exist", "call-000007", 2, "BYE", alice(), bob("x5"),
                              [v1]))
    add("not_acceptable_here", response(488, "Not Acceptable Here", "call-000008", 1, "INVITE", alice(), bob("x6"),
                                        [v1]))
    add("server_error", response(500, "Server Internal Error", "call-000009", 1, "INVITE", alice(), bob("x7"), [v1]))
    add("empty_reason", response(200, "", "call-000010", 1, "INVITE", alice(), bob("b1"), [v1]))
    # spelling variants
    add("compact_names", request("INVITE", "sip:bob@unity", "cmp-1", 7, alice(), bob(), [v1],
                                 contact="<sip:alice@10.0.0.1>", ctype="application/sdp", body=offer), compact=True)
    add("lowercase_names", request("BYE", "sip:bob@unity", "low-1", 3, alice(), bob("b2"), [v1]), lower=True)
    add("scrambled_order", request("INVITE", "sip:bob@unity", "ord-1", 1, alice(), bob(), [v1],
                                   ctype="application/sdp", body=offer),
        order=["CSeq", "Content-Length", "To", "Via", "Content-Type", "Call-ID", "From", "Contact"])
    add("via_comma_list", response(180, "Ringing", "via-1", 1, "INVITE", alice(), bob("b3"), [v2, v1]),
        via_style="comma")
    add("three_vias", response(200, "OK", "via-2", 1, "INVITE", alice(), bob("b3"),
                               [v2, "SIP/2.0/UDP 10.0.0.9;branch=z9hG4bKmid", v1]))
    add("no_content_length", request("ACK", "sip:bob@unity", "ncl-1", 1, alice(), bob("b4"), [v1]),
        with_length=False)
    add("no_content_length_body", request("INVITE", "sip:bob@unity", "ncl-2", 1, alice(), bob(), [v1],
                                          ctype="application/sdp", body=offer), with_length=False)
    add("bare_lf", request("INVITE", "sip:bob@unity", "lf-1", 1, alice(), bob(), [v1],
                           ctype="application/sdp", body=offer), eol="\n")
    add("bare_lf_response", response(200, "OK", "lf-2", 1, "INVITE", alice(), bob("b5"), [v1]), eol="\n")
    add("display_names", request("INVITE", "sip:bob@unity", "disp-1", 1, alice(display="Alice Liddell"),
                                 bob(display="Bob"), [v1]))
    add("unquoted_display", request("INVITE", "sip:bob@unity", "disp-2", 1, alice(display="Alice"), bob(), [v1]),
        quote=False)
    add("bare_uris", request("BYE", "sip:bob@unity", "bare-1", 4, alice(), bob("b6"), [v1]), angle=False)
    add("uri_params", request("INVITE", "sip:bob@unity", "par-1", 1, alice(params=";user=phone"),
                              bob(params=";lr;transport=udp"), [v1]))
    add("tag_before_params", request("INVITE", "sip:bob@unity", "par-2", 1, alice(params=";x=1"), bob(), [v1]),
        tag_first=True)
    add("unknown_headers", request("INVITE", "sip:bob@unity", "unk-1", 1, alice(), bob(), [v1],
                                   others=[("Max-Forwards", "70"), ("User-Agent", "sipp/3.6"),
                                           ("X-Trace", "a=b; c=d"), ("Allow", "INVITE, ACK, BYE")]))
    add("unknown_between", request("REGISTER", "sip:unity", "unk-2", 2, alice(), alice(None), [v1],
                                   contact="<sip:alice@10.0.0.1>;expires=600",
                                   others=[("Expires", "600"), ("Supported", "path")]))
    add("large_cseq", request("BYE", "sip:bob@unity", "big-1", 4294967295, alice(), bob("b7"), [v1]))
    add("long_call_id", request("INVITE", "sip:bob@unity", "a84b4c76e66710@pc33.atlanta.example.com-" + "x" * 80, 1,
                                alice(), bob(), [v1]))
    add("ipv4_contact", response(200, "OK", "ct-1", 1, "INVITE", alice(), bob("b8"), [v1],
                                 contact="<sip:bob@192.0.2.4:5070;transport=udp>"))
    add("g729_offer", request("INVITE", "sip:bob@unity", "g729-1", 1, alice(), bob(), [v1],
                              ctype="application/sdp", body=sdp("77", "10.0.0.3", 41000, [18, 0])))
    add("pcma_only", request("INVITE", "sip:bob@unity", "pcma-1", 1, alice(), bob(), [v1],
                             ctype="application/sdp", body=sdp("78", "10.0.0.4", 42000, [8])))
    add("text_body", request("INVITE", "sip:bob@unity", "txt-1", 1, alice(), bob(), [v1],
                             ctype="text/plain", body="hello\r\nworld"))
    add("utf8_body", response(200, "OK", "utf-1", 1, "INVITE", alice(), bob("b0"), [v1],
                              ctype="text/plain", body="café ✓"))

    # folded header: the From value continues on an indented line
    def fold(hdrs):
        res = []
        for n, v in hdrs:
            if n == "From":
                res.append((n, '"Alice"'))
                res.append((None, "\t<sip:alice@unity>;tag=a1"))
            else:
                res.append((n, v))
        return res
    add("folded_from", request("INVITE", "sip:bob@unity", "fold-1", 1, alice(display="Alice"), bob(), [v1]),
        extra=fold)

    # irregular whitespace around names and values
    def spaced(hdrs):
        return [(n + " " if n else n, "  " + v + " ") if n else (n, v) for n, v in hdrs]
    add("extra_spaces", request("BYE", "sip:bob@unity", "sp-1", 9, alice(), bob("b1"), [v1]), extra=spaced)
    return out


BAD = [
    # name, raw, error, line (0 = no line)
    ("bye_cseq_on_invite",
     "INVITE sip:bob@unity SIP/2.0\r\nCall-ID: c1\r\nCSeq: 1 BYE\r\nFrom: <sip:alice@unity>;tag=a1\r\n"
     "To: <sip:bob@unity>\r\nContent-Length: 0\r\n\r\n", "BadCSeqMethod", 3),
    ("short_body",
     "SIP/2.0 200 OK\r\nCall-ID: c1\r\nCSeq: 1 INVITE\r\nFrom: <sip:alice@unity>;tag=a1\r\n"
     "To: <sip:bob@unity>;tag=b1\r\nContent-Length: 4\r\n\r\nabc", "BadContentLength", 6),
    ("long_body",
     "SIP/2.0 200 OK\r\nCall-ID: c1\r\nCSeq: 1 INVITE\r\nFrom: <sip:alice@unity>;tag=a1\r\n"
     "To: <sip:bob@unity>;tag=b1\r\nContent-Length: 2\r\n\r\nabc", "BadContentLength", 6),
    ("non_numeric_length",
     "ACK sip:bob@unity SIP/2.0\r\nCall-ID: c1\r\nCSeq: 1 ACK\r\nFrom: <sip:alice@unity>;tag=a1\r\n"
     "To: <sip:bob@unity>\r\nContent-Length: ten\r\n\r\n", "BadContentLength", 6),
    ("missing_call_id",
     "BYE sip:bob@unity SIP/2.0\r\nCSeq: 2 BYE\r\nFrom: <sip:alice@unity>;tag=a1\r\nTo: <sip:bob@unity>\r\n\r\n",
     "MissingMandatoryHeader", 0),
    ("missing_from",
     "BYE sip:bob@unity SIP/2.0\r\nCall-ID: c1\r\nCSeq: 2 BYE\r\nTo: <sip:bob@unity>\r\n\r\n",
     "MissingMandatoryHeader", 0),
    ("unsupported_method",
     "OPTIONS sip:bob@unity SIP/2.0\r\nCall-ID: c1\r\nCSeq: 1 OPTIONS\r\n\r\n", "MalformedStartLine", 1),
    ("garbage_start",
     "HELLO WORLD\r\nCall-ID: c1\r\n\r\n", "MalformedStartLine", 1),
    ("bad_status",
     "SIP/2.0 99 Low\r\nCall-ID: c1\r\n\r\n", "MalformedStartLine", 1),
    ("no_blank_line",
     "INVITE sip:bob@unity SIP/2.0\r\nCall-ID: c1\r\n", "TruncatedMessage", 0),
    ("header_without_colon",
     "INVITE sip:bob@unity SIP/2.0\r\nCall-ID c1\r\n\r\n", "MissingMandatoryHeader", 2),
]


def main():
    if len(sys.argv) != 2:
        sys.exit(__doc__)
    root = sys.argv[1]
    good = os.path.join(root, "good")
    bad = os.path.join(root, "bad")
    os.makedirs(good, exist_ok=True)
    os.makedirs(bad, exist_ok=True)
    for i, (name, case) in enumerate(cases(), 1):
        base = os.path.join(good, "%02d_%s" % (i, name))
        with open(base + ".sip", "wb") as f:
            f.write(case.raw().encode())
        with open(base + ".expected.json", "w", newline="\n") as f:
            json.dump(case.expect, f, indent=2, ensure_ascii=False)
            f.write("\n")
    for i, (name, raw, err, line) in enumerate(BAD, 1):
        base = os.path.join(bad, "%02d_%s" % (i, name))
        with open(base + ".sip", "wb") as f:
            f.write(raw.encode())
        with open(base + ".expected.json", "w", newline="\n") as f:
            json.dump({"error": err, "line": line}, f, indent=2)
            f.write("\n")


if __name__ == "__main__":
    main()
