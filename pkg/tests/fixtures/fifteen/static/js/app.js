fetch("/api/stats?window=5").then(function (r) { return r.text(); });
