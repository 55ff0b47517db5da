import { ApiClient } from "./api.js";
import { mountApp } from "./app.js";

const base = new URLSearchParams(window.location.search).get("api") ?? "";
const root = document.getElementById("app");
if (root === null) {
  throw new Error("missing #app mount point");
}
void mountApp(root, new ApiClient(base));
