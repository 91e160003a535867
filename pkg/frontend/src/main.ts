import { ApiClient } from "./api.js";
import { createApp } from "./app.js";

const root = document.getElementById("app");
if (root) {
  const base = (window as { LAYOUTEDIT_API_BASE?: string }).LAYOUTEDIT_API_BASE ?? "http://127.0.0.1:8321";
  createApp(root, new ApiClient(base));
}
