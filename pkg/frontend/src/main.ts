import { initApp } from "./app";

initApp(document);
