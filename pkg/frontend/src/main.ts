/** Bootstrap: mount the app against a configurable API base URL. */

import { ApiClient } from "./api.js";
import { createApp } from "./app.js";

declare global {
  interface Window {
    __CPSEARCH_API_BASE__?: string;
  }
}

const root = document.getElementById("app");
if (root === null) {
  throw new Error("missing #app mount point");
}
// Default to same-origin so `cpsearch serve --static-dir frontend/dist`
// works without configuration.
const apiBase = window.__CPSEARCH_API_BASE__ ?? "";
createApp(root, new ApiClient(apiBase));
