// Browser entry point: connects to the analytics service and mounts the app.
// The service origin defaults to the local server and can be overridden with
// ?service=http://host:port when the page is hosted elsewhere.

import { ApiClient } from "./api.js";
import { bootstrap } from "./main.js";
import { AppStore } from "./store.js";

const params = new URLSearchParams(window.location.search);
const base = params.get("service") ?? "http://127.0.0.1:8000";
const root = document.getElementById("app");
if (root) {
  bootstrap(root, new AppStore(new ApiClient(base)));
}
