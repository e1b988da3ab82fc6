#pragma once

namespace dreval::testing {

struct DomainCase {
  const char* url;
  const char* root;
};

// Expected values were computed ahead of the build with an independent
// public-suffix implementation over the vendored list.
inline constexpr DomainCase kDomainCases[] = {
    {"https://www.nature.com/articles/xyz", "nature.com"},
    {"http://example.com", "example.com"},
    {"https://blogs.nih.gov/a/b?c=1", "nih.gov"},
    {"https://www.bbc.co.uk/news/world-1", "bbc.co.uk"},
    {"https://news.bbc.co.uk", "bbc.co.uk"},
    {"https://WWW.Reuters.COM/markets/", "reuters.com"},
    {"https://en.wikipedia.org/wiki/Earth", "wikipedia.org"},
    {"https://data.gov.uk/dataset/abc", "data.gov.uk"},
    {"https://www.ox.ac.uk/research", "ox.ac.uk"},
    {"https://arxiv.org/abs/2401.00001", "arxiv.org"},
    {"https://github.com/org/repo/blob/main/x.py", "github.com"},
    {"https://user.github.io/page", "github.io"},
    {"https://www.abc.net.au/news", "abc.net.au"},
    {"https://www.kyoto-u.ac.jp/en", "kyoto-u.ac.jp"},
    {"https://city.kawasaki.jp/index.html", "city.kawasaki.jp"},
    {"https://www.example.com.br/path", "example.com.br"},
    {"https://foo.bar.service.gov.uk:8443/x", "service.gov.uk"},
    {"https://www.cam.ac.uk./about", "cam.ac.uk"},
    {"https://stats.oecd.org/Index.aspx", "oecd.org"},
    {"https://a.b.c.example.co.nz/q#frag", "example.co.nz"},
    {"https://foo.bar.ck/x", "foo.bar.ck"},
    {"https://shop.example.kawasaki.jp", "shop.example.kawasaki.jp"},
};


}  // namespace dreval::testing
